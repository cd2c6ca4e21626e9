#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sfps/sfps.hpp"

namespace fs = std::filesystem;
using namespace sfps;

namespace {

struct Common {
    std::string config = "default";
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "INI config file, or 'default'");
    cmd->add_option("--seed", c.seed, "seed (replaces the configured seed list)");
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--set", c.sets, "override one key, section.key=value (repeatable)");
}

harness::ExperimentConfig load_config(const Common& c) {
    harness::ExperimentConfig cfg;
    if (c.config != "default") {
        std::ifstream in(c.config);
        if (!in) throw ConfigError("cannot read config file " + c.config);
        harness::apply_config(cfg, in);
    }
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
        harness::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (c.seed) {
        cfg.world.seed = *c.seed;
        cfg.seeds = {*c.seed};
    }
    cfg.validate();
    return cfg;
}

std::vector<double> parse_list(const std::string& name, const std::string& text) {
    std::vector<double> v;
    for (const auto& p : harness::detail::split(text, ',')) v.push_back(harness::detail::parse_number<double>(name, p));
    if (v.empty()) throw ConfigError(name + " must not be empty");
    return v;
}

std::vector<est::EstimatorHandle> bootstrap_estimators(const harness::ExperimentConfig& cfg) {
    std::vector<est::EstimatorHandle> hs;
    for (const auto& s : harness::learned_specs(cfg)) hs.push_back(est::make_estimator(s.spec));
    return hs;
}

void write_dataset(const fs::path& path, const est::EstimatorHandle& h, std::span<const est::TrainingSample> data) {
    auto os = harness::open_output(path);
    est::write_dataset_csv(os, h, data);
}

int cmd_simulate(const Common& c) {
    const auto cfg = load_config(c);
    const fs::path out = c.out;
    const auto estimators = bootstrap_estimators(cfg);
    const auto policy = harness::make_policy(cfg, estimators);
    world::SimOptions opt;
    opt.log_decisions = true;
    opt.keep_drone_series = false;
    const auto r = world::run_simulation(cfg.world, policy, {}, cfg.world.seed, opt);

    harness::write_resolved_config(out, cfg);
    harness::write_json(out / "metrics.json", harness::metrics_json(r, cfg.world.seed));
    {
        auto os = harness::open_output(out / "timeseries.csv");
        harness::write_timeseries_csv(os, r);
    }
    {
        auto os = harness::open_output(out / "decisions.csv");
        harness::write_decisions_csv(os, r.decisions);
    }
    std::cout << "damage_rate " << format_double(r.damage_rate) << " survived " << r.survived_drones << "/"
              << r.n_drones << '\n';
    return 0;
}

void write_training(const fs::path& out, const harness::TrainingOutcome& t) {
    {
        auto os = harness::open_output(out / "report.csv");
        harness::write_report_csv(os, t.report);
    }
    for (std::size_t e = 0; e < t.estimators.size(); ++e) {
        const auto& h = t.estimators[e];
        auto j = harness::model_json(h);
        j["selected_iteration"] = t.selected_iteration;
        harness::write_json(out / ("model_" + h.spec().id + ".json"), j);
        if (e < t.last_data.size()) write_dataset(out / ("dataset_" + h.spec().id + ".csv"), h, t.last_data[e]);
    }
    for (const auto& r : t.report)
        if (!r.training_error.empty())
            std::cerr << "iteration " << r.iteration << ": training failed: " << r.training_error << '\n';
}

int cmd_train(const Common& c) {
    const auto cfg = load_config(c);
    const fs::path out = c.out;
    const auto t = harness::iterative_training(cfg);
    harness::write_resolved_config(out, cfg);
    write_training(out, t);
    const auto& last = t.report.back();
    std::cout << "iterations " << t.report.size() << " selected " << t.selected_iteration << " last damage "
              << format_double(last.mean_damage) << " survived " << format_double(last.mean_survived) << '\n';
    return 0;
}

int cmd_sweep_constant(const Common& c, const std::string& values) {
    const auto cfg = load_config(c);
    const fs::path out = c.out;
    const auto v = values.empty() ? harness::default_constant_values() : parse_list("--values", values);
    const auto res = harness::grid_search_constant(cfg, v, cfg.seeds);
    harness::write_resolved_config(out, cfg);
    auto os = harness::open_output(out / "sweep_constant.csv");
    harness::write_sweep_csv(os, res);
    std::cout << "rows " << res.rows.size() << '\n';
    return 0;
}

int cmd_sweep_bcf(const Common& c, const std::string& bs, const std::string& cs, const std::string& fs_) {
    auto cfg = load_config(c);
    cfg.scenario = rules::Scenario::Protection;
    const fs::path out = c.out;

    std::vector<rules::ProtectionRuleParams> grid;
    if (bs.empty() && cs.empty() && fs_.empty()) {
        grid = harness::default_bcf_grid();
    } else {
        const auto b = parse_list("--b", bs.empty() ? "0" : bs);
        const auto cc = parse_list("--c", cs.empty() ? "0" : cs);
        const auto f = parse_list("--f", fs_.empty() ? "0" : fs_);
        for (double x : b)
            for (double y : cc)
                for (double z : f)
                    if (x + y + z < 1.0) grid.push_back({x, y, z});
        if (grid.empty()) throw ConfigError("no grid point satisfies b + c + f < 1");
    }

    const auto t = harness::iterative_training(cfg);
    const auto birds = harness::tabulated_predictor(t.estimators[0], cfg.world.ticks_per_day, cfg.birds_horizon);
    const auto res = harness::grid_search_bcf(cfg, grid, cfg.seeds, birds);
    harness::write_resolved_config(out, cfg);
    write_training(out, t);
    auto os = harness::open_output(out / "sweep_bcf.csv");
    harness::write_sweep_csv(os, res);
    std::cout << "rows " << res.rows.size() << '\n';
    return 0;
}

int cmd_pareto(const Common& c, const std::string& input) {
    std::ifstream in(input);
    if (!in) throw ConfigError("cannot read " + input);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError(input + ": empty file");
    const auto cols = harness::detail::split(header, ',');
    auto find = [&](std::initializer_list<std::string_view> names) -> std::size_t {
        for (std::size_t i = 0; i < cols.size(); ++i)
            for (auto n : names)
                if (cols[i] == n) return i;
        throw ConfigError(input + ": missing damage/survived column");
    };
    const auto di = find({"damage_rate", "mean_damage", "damage"});
    const auto si = find({"survived_drones", "mean_survived", "survived"});

    std::vector<std::string> lines;
    std::vector<harness::UtilityPoint> pts;
    for (std::string line; std::getline(in, line);) {
        if (harness::detail::trim(line).empty()) continue;
        const auto f = harness::detail::split(line, ',');
        if (f.size() != cols.size()) throw ConfigError(input + ": ragged row '" + line + "'");
        pts.push_back({harness::detail::parse_number<double>("damage", f[di]),
                       harness::detail::parse_number<double>("survived", f[si])});
        lines.push_back(harness::detail::trim(line));
    }
    if (pts.empty()) throw ConfigError(input + ": no rows");
    const auto flags = harness::pareto_flags(pts);

    std::ostringstream os;
    os << harness::detail::trim(header) << ",pareto\n";
    for (std::size_t i = 0; i < lines.size(); ++i) os << lines[i] << ',' << (flags[i] ? 1 : 0) << '\n';
    auto file = harness::open_output(fs::path(c.out) / "pareto.csv");
    file << os.str();
    std::cout << os.str();
    return 0;
}

int cmd_eval(const Common& c, const std::string& which, const std::string& guard) {
    const auto cfg = load_config(c);
    const fs::path out = c.out;

    est::EstimatorSpec spec;
    world::Subject subject = world::Subject::Drones;
    int stride = 1;
    rules::Policy policy;
    if (which == "future_battery") {
        est::ValidityGuard g;
        if (guard == "mode_never_charging")
            g = est::ValidityGuard::mode_never(DroneMode::Charging);
        else if (guard != "always_valid")
            throw ConfigError("unknown guard: " + guard);
        spec = harness::future_battery_spec(cfg, g);
        stride = cfg.battery_stride;
        auto cc = cfg;
        cc.scenario = rules::Scenario::Charging;
        cc.battery_source = harness::BatterySource::LowerBound;
        policy = harness::make_policy(cc, bootstrap_estimators(cc));
    } else if (which == "waiting_time") {
        auto cc = cfg;
        cc.scenario = rules::Scenario::Charging;
        cc.battery_source = harness::BatterySource::LowerBound;
        spec = harness::waiting_time_spec(cc);
        policy = harness::make_policy(cc, bootstrap_estimators(cc));
    } else if (which == "future_birds") {
        auto cc = cfg;
        cc.scenario = rules::Scenario::Protection;
        spec = harness::future_birds_spec(cc);
        subject = world::Subject::Field;
        policy = harness::make_policy(cc, bootstrap_estimators(cc));
    } else {
        throw ConfigError("unknown estimator: " + which);
    }

    std::vector<est::TrainingSample> data;
    std::size_t discarded = 0;
    for (int r = 0; r < cfg.runs_per_iteration; ++r) {
        std::vector<world::Collector> col{{est::make_estimator(spec), subject, stride}};
        world::SimOptions opt;
        opt.keep_drone_series = false;
        const auto res = world::run_simulation(cfg.world, policy, col, cfg.run_seed(r), opt);
        data.insert(data.end(), res.datasets[0].begin(), res.datasets[0].end());
        discarded += res.discarded[0];
    }
    if (data.size() < 2) throw Error("eval-estimator: too few samples collected");
    auto [train, test] = ml::split_dataset(data, cfg.test_fraction, mix_seed(cfg.seeds[0], 77));
    auto h = est::make_estimator(spec);
    const auto n_train = train.size();
    h.train_update(std::move(train));
    const auto rep = h.evaluate(test);

    harness::write_resolved_config(out, cfg);
    nlohmann::ordered_json j;
    j["estimator"] = spec.id;
    j["guard"] = spec.guard.describe();
    j["n_train"] = n_train;
    j["n_test"] = test.size();
    j["discarded_samples"] = discarded;
    j["mse"] = rep.mse;
    j["mae"] = rep.mae;
    harness::write_json(out / "eval.json", j);
    {
        auto os = harness::open_output(out / "scatter.csv");
        ml::write_scatter_csv(os, rep);
    }
    write_dataset(out / ("dataset_" + spec.id + ".csv"), h, data);
    harness::write_json(out / ("model_" + spec.id + ".json"), harness::model_json(h));
    std::cout << spec.id << " mse " << format_double(rep.mse) << " mae " << format_double(rep.mae) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smart field protection simulator and estimator experiments"};
    app.require_subcommand(1);

    Common c;
    std::string values, bs, cs, fs_, input, which = "future_battery", guard = "mode_never_charging";

    auto* sim = app.add_subcommand("simulate", "one run with bootstrap estimators");
    add_common(sim, c);
    auto* train = app.add_subcommand("train", "iterative simulate/train loop");
    add_common(train, c);
    auto* swc = app.add_subcommand("sweep-constant", "grid search over constant waiting times");
    add_common(swc, c);
    swc->add_option("--values", values, "comma-separated constants (default 0,5,...,100)");
    auto* swb = app.add_subcommand("sweep-bcf", "grid search over protection-rule coefficients");
    add_common(swb, c);
    swb->add_option("--b", bs, "comma-separated b values");
    swb->add_option("--c", cs, "comma-separated c values");
    swb->add_option("--f", fs_, "comma-separated f values");
    auto* par = app.add_subcommand("pareto", "flag Pareto-efficient rows of a utility CSV");
    add_common(par, c);
    par->add_option("--input", input, "CSV with damage and survived columns")->required();
    auto* ev = app.add_subcommand("eval-estimator", "train one estimator on collected data and score it");
    add_common(ev, c);
    ev->add_option("--estimator", which, "future_battery | waiting_time | future_birds");
    ev->add_option("--guard", guard, "mode_never_charging | always_valid (future_battery only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) return cmd_simulate(c);
        if (*train) return cmd_train(c);
        if (*swc) return cmd_sweep_constant(c, values);
        if (*swb) return cmd_sweep_bcf(c, bs, cs, fs_);
        if (*par) return cmd_pareto(c, input);
        if (*ev) return cmd_eval(c, which, guard);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
