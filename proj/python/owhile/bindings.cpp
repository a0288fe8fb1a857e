#include <algorithm>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "owhile/abstract.hpp"
#include "owhile/interp.hpp"
#include "owhile/parser.hpp"
#include "owhile/ppmap.hpp"
#include "owhile/soundness.hpp"

namespace py = pybind11;
using namespace owhile;

namespace {

std::uint64_t fuel_or_default(std::optional<std::uint64_t> fuel) { return fuel.value_or(default_fuel()); }

// Booleans stay booleans; locations become "l<n>" like everywhere else.
py::object value(const Value& v) {
    if (const bool* b = std::get_if<bool>(&v)) {
        return py::bool_(*b);
    }
    return py::str(render(v));
}

py::dict state_dict(const State& s) {
    py::dict env, heap;
    for (const auto& [x, v] : s.env) {
        env[py::str(x)] = value(v);
    }
    for (const auto& [l, obj] : s.heap) {
        py::dict fields;
        for (const auto& [f, v] : obj) {
            fields[py::str(f)] = value(v);
        }
        heap[py::str(render(l))] = fields;
    }
    py::dict out;
    out["env"] = env;
    out["heap"] = heap;
    return out;
}

py::dict run_text(const std::string& text, std::optional<std::uint64_t> fuel) {
    StatPtr s = parse(text);
    auto ev = eval_stat(State{}, *s, fuel_or_default(fuel), UnitPass{});
    py::dict out;
    if (ev.outcome.exhausted()) {
        out["status"] = "exhausted";
        out["env"] = py::dict();
        out["heap"] = py::dict();
    } else {
        out = state_dict(ev.outcome.result->state);
        out["status"] = ev.outcome.ok() ? "ok" : "err";
    }
    out["steps"] = ev.steps;
    if (ev.error) {
        out["error"] = py::make_tuple(std::string(to_string(ev.error->site)), std::string(to_string(ev.error->cause)));
    } else {
        out["error"] = py::none();
    }
    return out;
}

std::optional<std::vector<std::string>> trace_text(const std::string& text, std::optional<std::uint64_t> fuel) {
    auto ev = eval_stat(State{}, *parse(text), fuel_or_default(fuel), TracePass{});
    if (!ev.annotation) {
        return std::nullopt;
    }
    std::vector<std::string> out;
    for (TraceAtom a : ev.annotation->atoms()) {
        out.push_back(render(a));
    }
    return out;
}

std::optional<std::vector<std::pair<std::string, std::string>>> flows_text(const std::string& text, bool pp,
                                                                           std::optional<std::uint64_t> fuel) {
    auto ev = eval_stat(State{}, *parse(text), fuel_or_default(fuel), full_stack());
    if (!ev.annotation) {
        return std::nullopt;
    }
    PPResolver resolver(layer<Trace>(*ev.annotation));
    std::vector<std::pair<std::string, std::string>> out;
    for (const Flow& f : layer<FlowSet>(*ev.annotation).items()) {
        if (pp) {
            AbsFlow a = abstract_flow(f, resolver);
            out.emplace_back(render(a.src), render(a.dst));
        } else {
            out.emplace_back(render(f.src), render(f.dst));
        }
    }
    return out;
}

py::dict abs_val(const AbsVal& v) {
    std::vector<std::string> locs, deps;
    for (const ProgramPoint& p : v.locs) {
        locs.push_back(render(p));
    }
    for (const AbsSource& d : v.deps) {
        deps.push_back(render(d));
    }
    std::sort(deps.begin(), deps.end());
    py::dict out;
    out["locs"] = locs;
    out["deps"] = deps;
    return out;
}

py::dict analyze_text(const std::string& text) {
    AnalysisResult r = analyze_program(*annotate_pp({}, *parse(text)));
    py::dict env, heap;
    for (const auto& [x, v] : r.env) {
        env[py::str(x)] = abs_val(v);
    }
    for (const auto& [key, v] : r.heap) {
        heap[py::make_tuple(render(key.first), key.second)] = abs_val(v);
    }
    std::vector<std::pair<std::string, std::string>> fs;
    for (const AbsFlow& f : r.flows) {
        fs.emplace_back(render(f.src), render(f.dst));
    }
    std::sort(fs.begin(), fs.end());
    py::dict out;
    out["env"] = env;
    out["heap"] = heap;
    out["flows"] = fs;
    return out;
}

std::vector<py::dict> check_text(const std::string& text, std::optional<std::uint64_t> fuel, const std::string& name) {
    std::vector<py::dict> out;
    for (const CheckReport& r : check_all(*parse(text), fuel_or_default(fuel), name)) {
        py::dict d;
        d["program"] = r.program;
        d["check"] = r.check;
        d["status"] = std::string(to_string(r.status));
        d["obligations"] = r.obligations;
        d["witnesses"] = r.witnesses;
        out.push_back(d);
    }
    return out;
}

std::string generate(std::uint64_t seed, int max_depth, int max_stmts, double while_probability) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.max_depth = max_depth;
    cfg.max_stmts = max_stmts;
    cfg.while_probability = while_probability;
    return pretty(*gen_program(cfg));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Interpreter, flow instrumentation and dependency analysis for a small imperative language";

    py::register_exception<SyntaxError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<FixpointError>(m, "FixpointError", PyExc_RuntimeError);

    m.def("parse", [](const std::string& text) { return pretty(*parse(text)); }, py::arg("text"),
          "Parse a program and return its canonical pretty-printed form.");
    m.def("run", &run_text, py::arg("text"), py::arg("fuel") = py::none(),
          "Run from the empty state. Returns status, env, heap, steps and error.");
    m.def("trace", &trace_text, py::arg("text"), py::arg("fuel") = py::none(),
          "Trace atoms of the run, or None when fuel runs out.");
    m.def("flows", &flows_text, py::arg("text"), py::arg("pp") = false, py::arg("fuel") = py::none(),
          "Concrete flows as (source, store) strings, optionally lifted to program points.");
    m.def("analyze", &analyze_text, py::arg("text"), "Static dependency analysis from the bottom state.");
    m.def("check", &check_text, py::arg("text"), py::arg("fuel") = py::none(), py::arg("name") = "",
          "Run every soundness checker; one report dict per check.");
    m.def("generate", &generate, py::arg("seed"), py::arg("max_depth") = 4, py::arg("max_stmts") = 4,
          py::arg("while_probability") = 0.2, "A random program, deterministic in its arguments.");
}
