#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <utility>

namespace owhile {

// Persistent ordered map: an AVL tree with path copying. `set` returns a new
// version in O(log n) and leaves the old one intact, sharing all untouched
// subtrees.
template <class K, class V>
class PersistentMap {
    struct Node;
    using Ptr = std::shared_ptr<const Node>;

    struct Node {
        K key;
        V value;
        Ptr left, right;
        int height;
        std::size_t size;
        Node(K k, V v, Ptr l, Ptr r)
            : key(std::move(k)), value(std::move(v)), left(std::move(l)), right(std::move(r)),
              height(1 + std::max(height_of(left), height_of(right))), size(1 + size_of(left) + size_of(right)) {}
    };

    static int height_of(const Ptr& n) { return n ? n->height : 0; }
    static std::size_t size_of(const Ptr& n) { return n ? n->size : 0; }

    static Ptr make(const Node& like, Ptr l, Ptr r) { return std::make_shared<const Node>(like.key, like.value, std::move(l), std::move(r)); }

    static Ptr balance(const Node& n, Ptr l, Ptr r) {
        int hl = height_of(l), hr = height_of(r);
        if (hl > hr + 1) {
            if (height_of(l->left) >= height_of(l->right)) {
                return make(*l, l->left, make(n, l->right, std::move(r)));
            }
            const Node& lr = *l->right;
            return make(lr, make(*l, l->left, lr.left), make(n, lr.right, std::move(r)));
        }
        if (hr > hl + 1) {
            if (height_of(r->right) >= height_of(r->left)) {
                return make(*r, make(n, std::move(l), r->left), r->right);
            }
            const Node& rl = *r->left;
            return make(rl, make(n, std::move(l), rl.left), make(*r, rl.right, r->right));
        }
        return make(n, std::move(l), std::move(r));
    }

    static Ptr insert(const Ptr& n, const K& k, V v) {
        if (!n) {
            return std::make_shared<const Node>(k, std::move(v), nullptr, nullptr);
        }
        if (k < n->key) {
            return balance(*n, insert(n->left, k, std::move(v)), n->right);
        }
        if (n->key < k) {
            return balance(*n, n->left, insert(n->right, k, std::move(v)));
        }
        return std::make_shared<const Node>(k, std::move(v), n->left, n->right);
    }

    template <class Fn>
    static bool walk(const Node* n, Fn& fn) {
        return !n || (walk(n->left.get(), fn) && fn(n->key, n->value) && walk(n->right.get(), fn));
    }

public:
    const V* find(const K& k) const {
        const Node* n = root_.get();
        while (n) {
            if (k < n->key) {
                n = n->left.get();
            } else if (n->key < k) {
                n = n->right.get();
            } else {
                return &n->value;
            }
        }
        return nullptr;
    }

    PersistentMap set(const K& k, V v) const {
        PersistentMap out;
        out.root_ = insert(root_, k, std::move(v));
        return out;
    }

    std::size_t size() const { return size_of(root_); }

    // In key order; fn(key, value) returns false to stop.
    template <class Fn>
    void for_each(Fn&& fn) const {
        walk(root_.get(), fn);
    }

    std::map<K, V> to_map() const {
        std::map<K, V> out;
        for_each([&](const K& k, const V& v) {
            out.emplace_hint(out.end(), k, v);
            return true;
        });
        return out;
    }

    bool same_as(const PersistentMap& o) const { return root_ == o.root_; }
    bool operator==(const PersistentMap& o) const {
        return root_ == o.root_ || (size() == o.size() && to_map() == o.to_map());
    }

private:
    Ptr root_;
};

} // namespace owhile
