#include "owhile/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "owhile/abstract.hpp"
#include "owhile/interp.hpp"
#include "owhile/parser.hpp"
#include "owhile/ppmap.hpp"
#include "owhile/soundness.hpp"

namespace owhile {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kFuzzFuel = 10'000;
constexpr std::size_t kShownAtoms = 6;

struct Options {
    std::string path;
    std::optional<std::uint64_t> fuel;
    bool json = false;
    bool pp = false;
    std::size_t count = 100;
    std::uint64_t seed = 42;
    int size = 4;
};

// Thrown for anything that should end the command with kExitUsage.
struct UsageError {
    std::string message;
};

StatPtr load(const std::string& path) {
    try {
        return parse(read_source(path));
    } catch (const SyntaxError& e) {
        throw UsageError{e.what()};
    } catch (const std::runtime_error& e) {
        throw UsageError{e.what()};
    }
}

std::uint64_t fuel_of(const Options& o, std::uint64_t fallback) { return o.fuel.value_or(fallback); }

Json to_json(const Value& v) {
    if (const bool* b = std::get_if<bool>(&v)) {
        return *b;
    }
    return render(v);
}

template <class Range, class Fn>
Json sorted_strings(const Range& r, Fn&& show) {
    std::set<std::string> s;
    for (const auto& x : r) {
        s.insert(show(x));
    }
    return Json(std::vector<std::string>(s.begin(), s.end()));
}

Json state_json(const State& s) {
    Json env = Json::object();
    for (const auto& [x, v] : s.env) {
        env[x] = to_json(v);
    }
    std::map<std::string, const Object*> objs;
    for (const auto& [l, o] : s.heap) {
        objs[render(l)] = &o;
    }
    Json heap = Json::object();
    for (const auto& [l, o] : objs) {
        Json fields = Json::object();
        for (const auto& [f, v] : *o) {
            fields[f] = to_json(v);
        }
        heap[l] = std::move(fields);
    }
    return Json{{"env", std::move(env)}, {"heap", std::move(heap)}};
}

void print_state(std::ostream& out, const State& s) {
    for (const auto& [x, v] : s.env) {
        out << x << " = " << render(v) << '\n';
    }
    std::map<std::string, const Object*> objs;
    for (const auto& [l, o] : s.heap) {
        objs[render(l)] = &o;
    }
    for (const auto& [l, o] : objs) {
        if (o->empty()) {
            out << l << " = {}\n";
        }
        for (const auto& [f, v] : *o) {
            out << l << '.' << f << " = " << render(v) << '\n';
        }
    }
}

// Shared tail of run, trace and flows: diagnostics and the exit code.
template <class Ev>
int outcome_code(const Ev& ev, std::ostream& err) {
    if (ev.outcome.exhausted()) {
        err << "owhile: out of fuel after " << ev.steps << " steps\n";
        return kExitOutOfFuel;
    }
    if (ev.outcome.err()) {
        err << "owhile: error";
        if (ev.error) {
            err << " in " << to_string(ev.error->site) << ": " << to_string(ev.error->cause);
        }
        err << '\n';
        return kExitProgramError;
    }
    return kExitOk;
}

std::string_view status_name(const Outcome<StatResult>& o) {
    return o.exhausted() ? "exhausted" : o.ok() ? "ok" : "err";
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
    StatPtr s = load(o.path);
    auto ev = eval_stat(State{}, *s, fuel_of(o, default_fuel()), UnitPass{});
    if (o.json) {
        Json j{{"status", status_name(ev.outcome)}};
        Json st = ev.outcome.exhausted() ? state_json(State{}) : state_json(ev.outcome.result->state);
        j["env"] = std::move(st["env"]);
        j["heap"] = std::move(st["heap"]);
        out << j.dump(2) << '\n';
    } else if (!ev.outcome.exhausted()) {
        print_state(out, ev.outcome.result->state);
    }
    return outcome_code(ev, err);
}

int cmd_trace(const Options& o, std::ostream& out, std::ostream& err) {
    StatPtr s = load(o.path);
    auto ev = eval_stat(State{}, *s, fuel_of(o, default_fuel()), TracePass{});
    if (ev.annotation) {
        const Trace& t = *ev.annotation;
        if (o.json) {
            Json atoms = Json::array();
            for (TraceAtom a : t.atoms()) {
                atoms.push_back(render(a));
            }
            out << Json{{"atoms", std::move(atoms)}}.dump(2) << '\n';
        } else {
            for (TraceAtom a : t.atoms()) {
                out << render(a) << '\n';
            }
        }
    }
    return outcome_code(ev, err);
}

int cmd_flows(const Options& o, std::ostream& out, std::ostream& err) {
    StatPtr s = load(o.path);
    auto ev = eval_stat(State{}, *s, fuel_of(o, default_fuel()), full_stack());
    if (ev.annotation) {
        const auto& ann = *ev.annotation;
        std::set<std::pair<std::string, std::string>> rows;
        if (o.pp) {
            PPResolver resolver(layer<Trace>(ann));
            for (const Flow& f : layer<FlowSet>(ann).items()) {
                AbsFlow a = abstract_flow(f, resolver);
                rows.emplace(render(a.src), render(a.dst));
            }
        } else {
            std::optional<std::size_t> limit;
            if (!o.json) {
                limit = kShownAtoms;
            }
            for (const Flow& f : layer<FlowSet>(ann).items()) {
                rows.emplace(render(f.src, limit), render(f.dst, limit));
            }
        }
        if (o.json) {
            Json flows = Json::array();
            for (const auto& [src, dst] : rows) {
                flows.push_back(Json{{"src", src}, {"dst", dst}});
            }
            out << Json{{"flows", std::move(flows)}, {"ppMapped", o.pp}}.dump(2) << '\n';
        } else {
            for (const auto& [src, dst] : rows) {
                out << src << " -> " << dst << '\n';
            }
        }
    }
    return outcome_code(ev, err);
}

Json abs_val_json(const AbsVal& v) {
    return Json{{"locs", sorted_strings(v.locs, [](const ProgramPoint& p) { return render(p); })},
                {"deps", sorted_strings(v.deps, [](const AbsSource& d) { return render(d); })}};
}

std::string abs_val_text(const AbsVal& v) {
    auto join = [](const Json& xs) {
        std::string out = "{";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out += (i ? ", " : "") + xs[i].get<std::string>();
        }
        return out + "}";
    };
    Json j = abs_val_json(v);
    return join(j["locs"]) + " deps " + join(j["deps"]);
}

int cmd_analyze(const Options& o, std::ostream& out, std::ostream& err) {
    StatPtr s = annotate_pp({}, *load(o.path));
    AnalysisResult r;
    try {
        r = analyze_program(*s);
    } catch (const FixpointError& e) {
        err << "owhile: " << e.what() << '\n';
        return kExitProgramError;
    }
    std::map<std::string, std::map<std::string, const AbsVal*>> heap;
    for (const auto& [key, v] : r.heap) {
        heap[render(key.first)][key.second] = &v;
    }
    std::set<std::pair<std::string, std::string>> flows;
    for (const AbsFlow& f : r.flows) {
        flows.emplace(render(f.src), render(f.dst));
    }
    if (o.json) {
        Json env = Json::object();
        for (const auto& [x, v] : r.env) {
            env[x] = abs_val_json(v);
        }
        Json jheap = Json::object();
        for (const auto& [site, fields] : heap) {
            Json jf = Json::object();
            for (const auto& [f, v] : fields) {
                jf[f] = abs_val_json(*v);
            }
            jheap[site] = std::move(jf);
        }
        Json jflows = Json::array();
        for (const auto& [src, dst] : flows) {
            jflows.push_back(Json{{"src", src}, {"dst", dst}});
        }
        out << Json{{"absEnv", std::move(env)}, {"absHeap", std::move(jheap)}, {"flows", std::move(jflows)}}.dump(2)
            << '\n';
        return kExitOk;
    }
    out << "env:\n";
    for (const auto& [x, v] : r.env) {
        out << "  " << x << " = " << abs_val_text(v) << '\n';
    }
    out << "heap:\n";
    for (const auto& [site, fields] : heap) {
        for (const auto& [f, v] : fields) {
            out << "  obj@" << site << '.' << f << " = " << abs_val_text(*v) << '\n';
        }
    }
    out << "flows:\n";
    for (const auto& [src, dst] : flows) {
        out << "  " << src << " -> " << dst << '\n';
    }
    return kExitOk;
}

Json report_json(const CheckReport& r) {
    return Json{{"program", r.program},
                {"check", r.check},
                {"status", to_string(r.status)},
                {"obligations", r.obligations},
                {"witnesses", r.witnesses}};
}

int emit_reports(const std::vector<CheckReport>& reports, bool json, bool only_problems, std::ostream& out) {
    std::size_t failed = 0, skipped = 0;
    for (const CheckReport& r : reports) {
        failed += r.status == CheckStatus::Fail;
        skipped += r.status == CheckStatus::Skipped;
    }
    if (json) {
        Json all = Json::array();
        for (const CheckReport& r : reports) {
            all.push_back(report_json(r));
        }
        out << all.dump(2) << '\n';
    } else {
        for (const CheckReport& r : reports) {
            if (only_problems && r.status == CheckStatus::Pass) {
                continue;
            }
            out << to_string(r.status) << ' ' << r.check << ' ' << r.program << " (" << r.obligations
                << " obligations)\n";
            for (const std::string& w : r.witnesses) {
                out << "    " << w << '\n';
            }
        }
        out << reports.size() << " checks: " << reports.size() - failed - skipped << " passed, " << failed
            << " failed, " << skipped << " skipped\n";
    }
    return failed ? kExitCheckFailed : kExitOk;
}

std::vector<std::string> program_files(const std::string& path) {
    std::error_code ec;
    if (!fs::is_directory(path, ec)) {
        return {path};
    }
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ow") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw UsageError{"no .ow files under " + path};
    }
    return files;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream&) {
    std::vector<CheckReport> reports;
    for (const std::string& file : program_files(o.path)) {
        StatPtr s = load(file);
        for (CheckReport& r : check_all(*s, fuel_of(o, default_fuel()), file)) {
            reports.push_back(std::move(r));
        }
    }
    return emit_reports(reports, o.json, false, out);
}

int cmd_fuzz(const Options& o, std::ostream& out, std::ostream&) {
    std::vector<CheckReport> reports;
    for (std::size_t i = 0; i < o.count; ++i) {
        GenConfig cfg;
        cfg.seed = o.seed + i;
        cfg.max_depth = o.size;
        StatPtr s = gen_program(cfg);
        for (CheckReport& r : check_all(*s, fuel_of(o, kFuzzFuel), "fuzz:" + std::to_string(cfg.seed))) {
            if (r.status == CheckStatus::Fail) {
                r.witnesses.insert(r.witnesses.begin(), "program: " + pretty(*s));
            }
            reports.push_back(std::move(r));
        }
    }
    return emit_reports(reports, o.json, true, out);
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interpreter, instrumentation and dependency analysis for O'While programs", "owhile"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_flag("--json", o.json, "Machine-readable output");
        sub->add_option("--fuel", o.fuel, "Rule applications allowed per run")->check(CLI::PositiveNumber);
    };
    auto file_cmd = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("file", o.path, "Program (.ow)")->required();
        common(sub);
        return sub;
    };

    CLI::App* run = file_cmd("run", "Evaluate a program and print its final state");
    CLI::App* trace = file_cmd("trace", "Print the partial trace of a run");
    CLI::App* flows = file_cmd("flows", "Print the direct flows observed in a run");
    flows->add_flag("--pp", o.pp, "Render flows at program points");
    CLI::App* analyze = app.add_subcommand("analyze", "Run the static dependency analysis");
    analyze->add_option("file", o.path, "Program (.ow)")->required();
    analyze->add_flag("--json", o.json, "Machine-readable output");
    CLI::App* check = file_cmd("check", "Check the instrumentation properties and soundness");
    check->get_option("file")->description("Program or directory of .ow programs");
    CLI::App* fuzz = app.add_subcommand("fuzz", "Check generated programs (default fuel 10000)");
    fuzz->add_option("--count", o.count, "Number of samples")->check(CLI::PositiveNumber);
    fuzz->add_option("--seed", o.seed, "Seed of the first sample");
    fuzz->add_option("--size", o.size, "Maximum nesting depth")->check(CLI::PositiveNumber);
    common(fuzz);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            return cmd_run(o, out, err);
        }
        if (trace->parsed()) {
            return cmd_trace(o, out, err);
        }
        if (flows->parsed()) {
            return cmd_flows(o, out, err);
        }
        if (analyze->parsed()) {
            return cmd_analyze(o, out, err);
        }
        if (check->parsed()) {
            return cmd_check(o, out, err);
        }
        return cmd_fuzz(o, out, err);
    } catch (const UsageError& e) {
        err << "owhile: " << e.message << '\n';
        return kExitUsage;
    }
}

} // namespace owhile
