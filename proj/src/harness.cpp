#include "lrfree/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace lrfree {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that any
// leftover key can be reported as unknown.
class FieldReader {
public:
    FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* find(const std::string& key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() || it->is_null() ? nullptr : &*it;
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    std::optional<double> number(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) throw ConfigError(field(key), "expected a number");
        const double x = v->get<double>();
        if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
        return x;
    }

    std::optional<std::uint64_t> unsigned_int(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
            throw ConfigError(field(key), "expected a non-negative integer");
        return v->get<std::uint64_t>();
    }

    std::optional<std::string> string(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) throw ConfigError(field(key), "expected a string");
        return v->get<std::string>();
    }

    std::optional<ParamVec> vector(const std::string& key) {
        const json* v = find(key);
        if (!v) return std::nullopt;
        return to_vector(*v, field(key));
    }

    static ParamVec to_vector(const json& v, const std::string& where) {
        if (!v.is_array()) throw ConfigError(where, "expected an array of numbers");
        ParamVec out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
                throw ConfigError(where + "[" + std::to_string(i) + "]", "expected a finite number");
            out[i] = v[i].get<double>();
        }
        return out;
    }

    void finish() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

template <class F>
auto wrap_domain(const std::string& field, F f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

ObjectiveSpec parse_objective(const json& doc) {
    FieldReader r(doc, "objective");
    ObjectiveSpec spec;
    spec.kind = r.string("kind").value_or(spec.kind);
    spec.seed = r.unsigned_int("seed").value_or(spec.seed);
    spec.w0 = r.vector("w0");
    if (spec.kind == "quadratic" || spec.kind == "l1") {
        spec.dim = r.unsigned_int("dim").value_or(spec.dim);
        spec.w_star = r.vector("w_star");
        if (spec.kind == "quadratic") {
            spec.condition = r.number("condition").value_or(spec.condition);
            spec.diag = r.vector("diag");
            if (spec.diag) spec.dim = spec.diag->size();
            if (spec.condition < 1.0) throw ConfigError(r.field("condition"), "must be >= 1");
        }
        if (spec.w_star) {
            if (r.has("dim") && spec.w_star->size() != spec.dim)
                throw ConfigError(r.field("w_star"), "length does not match dim");
            if (spec.diag && spec.w_star->size() != spec.diag->size())
                throw ConfigError(r.field("w_star"), "length does not match diag");
            spec.dim = spec.w_star->size();
        }
        if (spec.dim == 0) throw ConfigError(r.field("dim"), "must be positive");
    } else if (spec.kind == "logistic" || spec.kind == "mlp") {
        spec.dataset.samples = r.unsigned_int("samples").value_or(spec.dataset.samples);
        spec.dataset.features = r.unsigned_int("features").value_or(spec.dataset.features);
        spec.dataset.noise = r.number("noise").value_or(spec.dataset.noise);
        spec.dataset.margin = r.number("margin").value_or(spec.dataset.margin);
        spec.dataset.seed = spec.seed;
        if (spec.kind == "mlp") spec.hidden = r.unsigned_int("hidden").value_or(spec.hidden);
        if (spec.dataset.samples == 0) throw ConfigError(r.field("samples"), "must be positive");
        if (spec.dataset.features == 0) throw ConfigError(r.field("features"), "must be positive");
        if (spec.dataset.noise < 0.0) throw ConfigError(r.field("noise"), "must be non-negative");
        if (spec.dataset.margin < 0.0) throw ConfigError(r.field("margin"), "must be non-negative");
        if (spec.kind == "mlp" && spec.hidden == 0) throw ConfigError(r.field("hidden"), "must be positive");
    } else {
        throw ConfigError(r.field("kind"), "unknown objective '" + spec.kind + "'");
    }
    r.finish();
    return spec;
}

void parse_optimizer(const json& doc, ExperimentConfig& cfg) {
    FieldReader r(doc, "optimizer");
    const auto kind = r.string("kind");
    if (!kind) throw ConfigError(r.field("kind"), "required");
    auto& o = cfg.optimizer;
    o.kind = wrap_domain(r.field("kind"), [&] { return parse_optimizer_kind(*kind); });

    auto allowed = [&](std::initializer_list<const char*> keys) {
        std::set<std::string> ok(keys.begin(), keys.end());
        ok.insert("kind");
        for (auto it = doc.begin(); it != doc.end(); ++it)
            if (!ok.count(it.key()))
                throw ConfigError(r.field(it.key()),
                                  "unknown key for optimizer '" + std::string(to_string(o.kind)) + "'");
    };
    switch (o.kind) {
        case OptimizerKind::Sgd: allowed({"lr"}); break;
        case OptimizerKind::Adam: allowed({"lr", "beta1", "beta2", "epsilon"}); break;
        case OptimizerKind::Sps:
        case OptimizerKind::NaiveScaledSps:
        case OptimizerKind::PsSps: allowed({"c"}); break;
        case OptimizerKind::DaSgd:
        case OptimizerKind::PsDaSgd: allowed({"d0", "momentum"}); break;
    }

    if (const json* lr = r.find("lr")) {
        if (lr->is_string() && lr->get<std::string>() == "tune") {
            cfg.tune_lr = true;
        } else if (lr->is_number() && lr->get<double>() >= 0.0 && std::isfinite(lr->get<double>())) {
            o.lr = lr->get<double>();
        } else {
            throw ConfigError(r.field("lr"), "expected a non-negative number or \"tune\"");
        }
    }
    o.beta1 = r.number("beta1").value_or(o.beta1);
    o.beta2 = r.number("beta2").value_or(o.beta2);
    o.epsilon = r.number("epsilon").value_or(o.epsilon);
    o.c = r.number("c").value_or(o.c);
    o.d0 = r.number("d0").value_or(o.d0);
    o.momentum = r.number("momentum").value_or(o.momentum);
    if (!(o.beta1 >= 0.0 && o.beta1 < 1.0)) throw ConfigError(r.field("beta1"), "must lie in [0, 1)");
    if (!(o.beta2 > 0.0 && o.beta2 < 1.0)) throw ConfigError(r.field("beta2"), "must lie in (0, 1)");
    if (o.epsilon < 0.0) throw ConfigError(r.field("epsilon"), "must be non-negative");
    if (!(o.c > 0.0)) throw ConfigError(r.field("c"), "must be positive");
    if (!(o.d0 > 0.0)) throw ConfigError(r.field("d0"), "must be positive");
    if (!(o.momentum >= 0.0 && o.momentum < 1.0)) throw ConfigError(r.field("momentum"), "must lie in [0, 1)");
    r.finish();
}

ScalingConfig parse_scaling(const json& doc) {
    FieldReader r(doc, "scaling");
    ScalingConfig s;
    if (auto rule = r.string("rule"))
        s.rule = wrap_domain(r.field("rule"), [&] { return parse_scaling_rule(*rule); });
    s.beta2 = r.number("beta2").value_or(s.beta2);
    s.epsilon = r.number("epsilon").value_or(s.epsilon);
    if (const json* v = r.find("value")) {
        if (s.rule != ScalingRule::Constant) throw ConfigError(r.field("value"), "only valid for the constant rule");
        s.constant = v->is_number() ? ParamVec{v->get<double>()} : FieldReader::to_vector(*v, r.field("value"));
        if (!all_positive(s.constant)) throw ConfigError(r.field("value"), "must be strictly positive");
    }
    if (s.rule == ScalingRule::Constant && s.constant.empty())
        throw ConfigError(r.field("value"), "required for the constant rule");
    if (!(s.beta2 > 0.0 && s.beta2 < 1.0)) throw ConfigError(r.field("beta2"), "must lie in (0, 1)");
    if (s.epsilon < 0.0) throw ConfigError(r.field("epsilon"), "must be non-negative");
    r.finish();
    return s;
}

Schedule parse_schedule(const json& doc, std::size_t steps) {
    FieldReader r(doc, "schedule");
    Schedule s;
    if (auto kind = r.string("kind"))
        s.kind = wrap_domain(r.field("kind"), [&] { return parse_schedule_kind(*kind); });
    s.exponent = r.number("exponent").value_or(s.exponent);
    s.total_steps = r.unsigned_int("total_steps").value_or(steps);
    if (s.kind == Schedule::Kind::Poly && !(s.exponent > 0.0))
        throw ConfigError(r.field("exponent"), "must be positive");
    if (s.kind == Schedule::Kind::Cosine && s.total_steps == 0) s.total_steps = 1;
    r.finish();
    return s;
}

json vector_json(const ParamVec& v) { return json(v.values()); }

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
    FieldReader r(doc, "");
    ExperimentConfig cfg;
    cfg.name = r.string("name").value_or(cfg.name);
    if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("name", "must be a non-empty file name");
    cfg.steps = r.unsigned_int("steps").value_or(cfg.steps);
    cfg.batch_size = r.unsigned_int("batch_size").value_or(cfg.batch_size);
    cfg.seed = r.unsigned_int("seed").value_or(cfg.seed);
    cfg.tolerance = r.number("tolerance").value_or(cfg.tolerance);
    cfg.output = r.string("output");

    const json* obj = r.find("objective");
    if (!obj) throw ConfigError("objective", "required");
    cfg.objective = parse_objective(*obj);

    const json* opt = r.find("optimizer");
    if (!opt) throw ConfigError("optimizer", "required");
    parse_optimizer(*opt, cfg);
    if (cfg.tune_lr && cfg.optimizer.kind != OptimizerKind::Sgd && cfg.optimizer.kind != OptimizerKind::Adam)
        throw ConfigError("optimizer.lr", "tuning applies to sgd and adam only");

    if (const json* s = r.find("scaling")) cfg.scaling = parse_scaling(*s);
    if (const json* s = r.find("schedule")) cfg.schedule = parse_schedule(*s, cfg.steps);
    else cfg.schedule.total_steps = cfg.steps;

    if (cfg.scaling.rule == ScalingRule::Constant && cfg.scaling.constant.size() != 1 &&
        cfg.objective.kind != "logistic" && cfg.objective.kind != "mlp" &&
        cfg.scaling.constant.size() != cfg.objective.dim)
        throw ConfigError("scaling.value", "length does not match the objective dimension");
    r.finish();
    return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

json to_json(const DatasetSpec& spec) {
    return json{{"samples", spec.samples}, {"features", spec.features}, {"noise", spec.noise},
                {"margin", spec.margin}, {"seed", spec.seed}};
}

DatasetSpec dataset_spec_from_json(const json& doc, const std::string& path) {
    FieldReader r(doc, path);
    DatasetSpec spec;
    spec.samples = r.unsigned_int("samples").value_or(spec.samples);
    spec.features = r.unsigned_int("features").value_or(spec.features);
    spec.noise = r.number("noise").value_or(spec.noise);
    spec.margin = r.number("margin").value_or(spec.margin);
    spec.seed = r.unsigned_int("seed").value_or(spec.seed);
    r.finish();
    return spec;
}

json to_json(const ExperimentConfig& cfg) {
    const auto& o = cfg.objective;
    json obj{{"kind", o.kind}, {"seed", o.seed}};
    if (o.w0) obj["w0"] = vector_json(*o.w0);
    if (o.kind == "quadratic" || o.kind == "l1") {
        obj["dim"] = o.dim;
        if (o.w_star) obj["w_star"] = vector_json(*o.w_star);
        if (o.kind == "quadratic") {
            obj["condition"] = o.condition;
            if (o.diag) obj["diag"] = vector_json(*o.diag);
        }
    } else {
        json ds = to_json(o.dataset);
        ds.erase("seed");
        obj.update(ds);
        if (o.kind == "mlp") obj["hidden"] = o.hidden;
    }

    const auto& p = cfg.optimizer;
    json opt{{"kind", std::string(to_string(p.kind))}};
    switch (p.kind) {
        case OptimizerKind::Sgd:
            opt["lr"] = cfg.tune_lr ? json("tune") : json(p.lr);
            break;
        case OptimizerKind::Adam:
            opt["lr"] = cfg.tune_lr ? json("tune") : json(p.lr);
            opt["beta1"] = p.beta1;
            opt["beta2"] = p.beta2;
            opt["epsilon"] = p.epsilon;
            break;
        case OptimizerKind::Sps:
        case OptimizerKind::NaiveScaledSps:
        case OptimizerKind::PsSps: opt["c"] = p.c; break;
        case OptimizerKind::DaSgd:
        case OptimizerKind::PsDaSgd:
            opt["d0"] = p.d0;
            opt["momentum"] = p.momentum;
            break;
    }

    json doc{{"name", cfg.name},
             {"objective", obj},
             {"optimizer", opt},
             {"steps", cfg.steps},
             {"batch_size", cfg.batch_size},
             {"seed", cfg.seed},
             {"tolerance", cfg.tolerance}};
    json sched{{"kind", std::string(to_string(cfg.schedule.kind))}};
    if (cfg.schedule.kind == Schedule::Kind::Poly) sched["exponent"] = cfg.schedule.exponent;
    if (cfg.schedule.kind == Schedule::Kind::Cosine) sched["total_steps"] = cfg.schedule.total_steps;
    doc["schedule"] = sched;
    if (uses_scaling(p.kind)) {
        json sc{{"rule", std::string(to_string(cfg.scaling.rule))}};
        if (cfg.scaling.rule == ScalingRule::Adam || cfg.scaling.rule == ScalingRule::AMSGrad) {
            sc["beta2"] = cfg.scaling.beta2;
            sc["epsilon"] = cfg.scaling.epsilon;
        }
        if (cfg.scaling.rule == ScalingRule::Constant) sc["value"] = vector_json(cfg.scaling.constant);
        doc["scaling"] = sc;
    }
    if (cfg.output) doc["output"] = *cfg.output;
    return doc;
}

std::string config_hash(const ExperimentConfig& config) {
    json doc = to_json(config);
    doc.erase("name");
    doc.erase("output");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(doc.dump()));
    return buf;
}

ObjectivePtr build_objective(const ObjectiveSpec& spec) {
    return wrap_domain("objective", [&]() -> ObjectivePtr {
        if (spec.kind == "quadratic" || spec.kind == "l1") {
            Rng rng(spec.seed);
            ParamVec w_star = spec.w_star ? *spec.w_star : rng.normal_vec(spec.dim);
            if (spec.kind == "l1") return l1_lipschitz(std::move(w_star));
            if (spec.diag) return quadratic(*spec.diag, std::move(w_star));
            return ill_conditioned_quadratic(spec.dim, spec.condition, std::move(w_star));
        }
        DatasetSpec ds = spec.dataset;
        ds.seed = spec.seed;
        if (spec.kind == "logistic") return logistic_regression(make_dataset(ds));
        if (spec.kind == "mlp") return tiny_mlp(make_dataset(ds), spec.hidden, spec.seed);
        throw ConfigError("objective.kind", "unknown objective '" + spec.kind + "'");
    });
}

ExperimentResult execute_experiment(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    std::optional<double> tuned;
    if (cfg.tune_lr) {
        const auto grid = default_lr_grid();
        tuned = tune_learning_rate(cfg, grid).lr;
        cfg.optimizer.lr = *tuned;
        cfg.tune_lr = false;
    }

    const ObjectivePtr objective = build_objective(cfg.objective);
    if (cfg.objective.w0 && cfg.objective.w0->size() != objective->dim())
        throw ConfigError("objective.w0", "length does not match the objective dimension");
    if (cfg.scaling.rule == ScalingRule::Constant && cfg.scaling.constant.size() != 1 &&
        cfg.scaling.constant.size() != objective->dim())
        throw ConfigError("scaling.value", "length does not match the objective dimension");
    auto optimizer = wrap_domain("optimizer", [&] {
        return make_optimizer(cfg.optimizer, cfg.scaling, objective->dim(), objective->f_star);
    });

    Rng rng(cfg.seed);
    RunOptions options;
    options.batch_size = cfg.batch_size;
    options.w0 = cfg.objective.w0;

    ExperimentResult result;
    result.trajectory = run(*optimizer, *objective, cfg.steps, cfg.schedule, rng, options);
    auto& s = result.summary;
    s.config_hash = config_hash(config);
    s.final_loss = result.trajectory.final_loss;
    s.min_loss = result.trajectory.min_loss;
    s.steps = cfg.steps;
    s.failure = result.trajectory.failure;
    s.tuned_lr = tuned;
    const double target = objective->f_star.value_or(-std::numeric_limits<double>::infinity());
    s.success = !s.failure && s.final_loss <= target + cfg.tolerance;
    return result;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRecord> records) {
    os << kTraceHeader << '\n';
    for (const auto& r : records) {
        os << r.step << ',' << format_double(r.loss) << ',' << format_double(r.lr) << ',';
        if (r.d) os << format_double(*r.d);
        os << ',' << format_double(r.grad_norm) << ',' << format_double(r.alpha_min) << ','
           << format_double(r.alpha_max) << '\n';
    }
}

json to_json(const RunSummary& s) {
    // Non-finite losses have no JSON encoding; they appear as null.
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json doc{{"config_hash", s.config_hash},
             {"final_loss", num(s.final_loss)},
             {"min_loss", num(s.min_loss)},
             {"steps", s.steps},
             {"success", s.success}};
    if (s.failure) doc["failure"] = *s.failure;
    if (s.tuned_lr) doc["tuned_lr"] = *s.tuned_lr;
    return doc;
}

RunSummary run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    ExperimentResult result = execute_experiment(config);
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream csv(out_dir / (config.name + ".csv"), std::ios::binary);
        if (!csv) throw UsageError("cannot write trace to " + out_dir.string());
        write_trace_csv(csv, result.trajectory.records);
    }
    std::ofstream summary(out_dir / (config.name + ".summary.json"), std::ios::binary);
    summary << to_json(result.summary).dump(2) << '\n';
    return result.summary;
}

std::vector<double> default_lr_grid() {
    std::vector<double> grid;
    for (int e = -8; e <= 0; ++e) grid.push_back(std::pow(10.0, e / 2.0));
    return grid;
}

TuneResult tune_learning_rate(const ExperimentConfig& base, std::span<const double> grid) {
    if (grid.empty()) throw UsageError("tune_learning_rate: empty grid");
    TuneResult best{grid.front(), std::numeric_limits<double>::infinity()};
    for (double lr : grid) {
        ExperimentConfig cfg = base;
        cfg.tune_lr = false;
        cfg.optimizer.lr = lr;
        const ExperimentResult r = execute_experiment(cfg);
        if (!r.summary.failure && r.summary.final_loss < best.final_loss) best = {lr, r.summary.final_loss};
    }
    return best;
}

std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& configs, const SweepOptions& options) {
    std::vector<SweepRow> rows(configs.size());
    auto work = [&](std::size_t i) {
        const auto& cfg = configs[i];
        SweepRow& row = rows[i];
        row.name = cfg.name;
        row.optimizer = std::string(to_string(cfg.optimizer.kind));
        try {
            const RunSummary s = options.out_dir ? run_experiment(cfg, *options.out_dir)
                                                 : execute_experiment(cfg).summary;
            row.final_loss = s.final_loss;
            row.min_loss = s.min_loss;
            row.success = s.success;
            if (s.failure) row.error = *s.failure;
        } catch (const std::exception& e) {
            row.final_loss = row.min_loss = std::numeric_limits<double>::quiet_NaN();
            row.error = e.what();
        }
    };

    const std::size_t threads = std::min(std::max<std::size_t>(options.threads, 1), configs.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) work(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < configs.size(); i = next++) work(i);
        });
    pool.clear();
    return rows;
}

std::vector<ExperimentConfig> parse_sweep(const json& doc) {
    const json* runs = &doc;
    if (doc.is_object()) {
        FieldReader r(doc, "");
        runs = r.find("runs");
        if (!runs) throw ConfigError("runs", "required");
        r.finish();
    }
    if (!runs->is_array()) throw ConfigError("runs", "expected an array of experiment configs");
    std::vector<ExperimentConfig> configs;
    for (std::size_t i = 0; i < runs->size(); ++i) {
        try {
            configs.push_back(parse_config((*runs)[i]));
        } catch (const ConfigError& e) {
            throw ConfigError("runs[" + std::to_string(i) + "]." + e.field(), e.message());
        }
    }
    return configs;
}

void print_table(std::ostream& os, std::span<const SweepRow> rows) {
    std::size_t name_w = 4;
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
    os << std::left << std::setw(static_cast<int>(name_w)) << "name" << "  " << std::setw(12)
       << "optimizer" << "  " << std::setw(14) << "final_loss" << "  " << std::setw(14) << "min_loss"
       << "  success\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(name_w)) << r.name << "  " << std::setw(12)
           << r.optimizer << "  " << std::setw(14) << std::setprecision(6) << r.final_loss << "  "
           << std::setw(14) << r.min_loss << "  " << (r.success ? "yes" : "no");
        if (!r.error.empty()) os << "  (" << r.error << ")";
        os << '\n';
    }
}

}  // namespace lrfree
