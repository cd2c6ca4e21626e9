#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sfps/harness/experiment.hpp"

namespace sfps::harness {

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, std::string_view text) {
    const auto s = trim(text);
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("bad value for " + key + ": '" + std::string(text) + "'");
    if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(v)) throw ConfigError("non-finite value for " + key);
    return v;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(v[i]);
        else
            out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace detail

/// One configurable key: `section.key` with text conversion both ways.
struct ConfigField {
    std::string section;
    std::string key;
    std::function<std::string()> get;
    std::function<void(const std::string&)> set;

    [[nodiscard]] std::string path() const { return section + "." + key; }
};

/// Every key of the config file, in file order, bound to `cfg`.
inline std::vector<ConfigField> config_fields(ExperimentConfig& cfg) {
    using detail::parse_number;
    std::vector<ConfigField> f;
    auto real = [&f](std::string sec, std::string key, double& ref) {
        const auto path = sec + "." + key;
        f.push_back({std::move(sec), std::move(key), [&ref] { return format_double(ref); },
                     [&ref, path](const std::string& s) { ref = parse_number<double>(path, s); }});
    };
    auto integer = [&f]<class I>(std::string sec, std::string key, I& ref) {
        const auto path = sec + "." + key;
        f.push_back({std::move(sec), std::move(key), [&ref] { return std::to_string(ref); },
                     [&ref, path](const std::string& s) { ref = parse_number<I>(path, s); }});
    };
    auto text = [&f](std::string sec, std::string key, std::function<std::string()> get,
                     std::function<void(const std::string&)> set) {
        f.push_back({std::move(sec), std::move(key), std::move(get), std::move(set)});
    };
    auto mlp = [&](const std::string& prefix, ml::MlpHyper& h) {
        const std::string sec = "estimators";
        text(sec, prefix + "_hidden", [&h] { return detail::join(h.hidden); },
             [&h, prefix](const std::string& s) {
                 std::vector<std::size_t> v;
                 for (const auto& p : detail::split(s, ','))
                     v.push_back(parse_number<std::size_t>(prefix + "_hidden", p));
                 h.hidden = std::move(v);
             });
        real(sec, prefix + "_learning_rate", h.learning_rate);
        integer(sec, prefix + "_epochs", h.epochs);
        integer(sec, prefix + "_batch_size", h.batch_size);
        text(sec, prefix + "_activation", [&h] { return std::string(ml::to_string(h.activation)); },
             [&h](const std::string& s) { h.activation = ml::output_activation_from_string(detail::trim(s)); });
        integer(sec, prefix + "_seed", h.seed);
    };

    auto& w = cfg.world;
    integer("world", "ticks_per_day", w.ticks_per_day);
    integer("world", "run_length", w.run_length);
    integer("world", "n_drones", w.n_drones);
    integer("world", "n_birds", w.n_birds);
    real("world", "field_width", w.field_width);
    real("world", "field_height", w.field_height);
    integer("world", "cells_x", w.cells_x);
    integer("world", "cells_y", w.cells_y);
    text("world", "hover_points",
         [&w] {
             std::string out;
             for (std::size_t i = 0; i < w.hover_points.size(); ++i) {
                 if (i) out += ';';
                 out += format_double(w.hover_points[i].x) + ':' + format_double(w.hover_points[i].y);
             }
             return out;
         },
         [&w](const std::string& s) {
             std::vector<world::Point> pts;
             for (const auto& item : detail::split(s, ';')) {
                 const auto xy = detail::split(item, ':');
                 if (xy.size() != 2) throw ConfigError("world.hover_points: expected x:y, got '" + item + "'");
                 pts.push_back({parse_number<double>("world.hover_points", xy[0]),
                                parse_number<double>("world.hover_points", xy[1])});
             }
             w.hover_points = std::move(pts);
         });
    real("world", "charger_x", w.charger_position.x);
    real("world", "charger_y", w.charger_position.y);
    integer("world", "charger_slots", w.charger_slots);
    real("world", "drone_speed", w.drone_speed);
    real("world", "moving_consumption", w.moving_consumption);
    real("world", "hovering_consumption", w.hovering_consumption);
    real("world", "charging_rate", w.charging_rate);
    real("world", "scare_radius", w.scare_radius);
    real("world", "bird_damage_per_tick", w.bird_damage_per_tick);
    real("world", "bird_activity", w.bird_activity);
    integer("world", "flee_cooldown", w.flee_cooldown);
    real("world", "attack_duration", w.attack_duration);
    real("world", "morning_amplitude", w.attack.morning_amplitude);
    real("world", "morning_peak", w.attack.morning_peak);
    real("world", "morning_sigma", w.attack.morning_sigma);
    real("world", "afternoon_amplitude", w.attack.afternoon_amplitude);
    real("world", "afternoon_peak", w.attack.afternoon_peak);
    real("world", "afternoon_sigma", w.attack.afternoon_sigma);
    integer("world", "seed", w.seed);

    text("policy", "scenario", [&cfg] { return std::string(rules::to_string(cfg.scenario)); },
         [&cfg](const std::string& s) { cfg.scenario = rules::scenario_from_string(detail::trim(s)); });
    real("policy", "safety_threshold", cfg.charging.safety_threshold);
    real("policy", "b", cfg.protection.b);
    real("policy", "c", cfg.protection.c);
    real("policy", "f", cfg.protection.f);
    integer("policy", "birds_horizon", cfg.birds_horizon);
    text("policy", "battery_source", [&cfg] { return std::string(to_string(cfg.battery_source)); },
         [&cfg](const std::string& s) { cfg.battery_source = battery_source_from_string(detail::trim(s)); });

    real("estimators", "waiting_bootstrap", cfg.waiting_bootstrap);
    real("estimators", "waiting_scale", cfg.waiting_scale);
    mlp("waiting", cfg.waiting_mlp);
    real("estimators", "battery_bootstrap", cfg.battery_bootstrap);
    integer("estimators", "battery_horizon", cfg.battery_horizon);
    integer("estimators", "battery_stride", cfg.battery_stride);
    mlp("battery", cfg.battery_mlp);
    integer("estimators", "birds_k", cfg.birds_k);
    real("estimators", "birds_bootstrap", cfg.birds_bootstrap);

    integer("experiment", "n_iterations", cfg.n_iterations);
    integer("experiment", "runs_per_iteration", cfg.runs_per_iteration);
    text("experiment", "seeds", [&cfg] { return detail::join(cfg.seeds); },
         [&cfg](const std::string& s) {
             std::vector<std::uint64_t> v;
             for (const auto& p : detail::split(s, ',')) v.push_back(parse_number<std::uint64_t>("experiment.seeds", p));
             cfg.seeds = std::move(v);
         });
    text("experiment", "selection", [&cfg] { return std::string(to_string(cfg.selection)); },
         [&cfg](const std::string& s) { cfg.selection = selection_from_string(detail::trim(s)); });
    integer("experiment", "replay_window", cfg.replay_window);
    real("experiment", "test_fraction", cfg.test_fraction);
    integer("experiment", "threads", cfg.threads);
    return f;
}

/// Sets `section.key` to `value`; unknown keys are config errors.
inline void set_config_value(ExperimentConfig& cfg, const std::string& path, const std::string& value) {
    for (auto& f : config_fields(cfg))
        if (f.path() == path) {
            f.set(value);
            return;
        }
    throw ConfigError("unknown config key: " + path);
}

/// Applies an INI document on top of `cfg`. Keys may be missing; unknown
/// sections or keys are rejected.
inline void apply_config(ExperimentConfig& cfg, std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    auto fields = config_fields(cfg);
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) throw ConfigError("config key outside a section: " + section);
        for (const auto& [key, node] : body) {
            const auto path = section + "." + key;
            bool found = false;
            for (auto& f : fields)
                if (f.path() == path) {
                    f.set(node.data());
                    found = true;
                    break;
                }
            if (!found) throw ConfigError("unknown config key: " + path);
        }
    }
}

/// Writes every key, so the output reproduces `cfg` exactly when read back.
inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
    auto copy = cfg;
    std::string section;
    for (const auto& f : config_fields(copy)) {
        if (f.section != section) {
            if (!section.empty()) os << '\n';
            section = f.section;
            os << '[' << section << "]\n";
        }
        os << f.key << " = " << f.get() << '\n';
    }
}

}  // namespace sfps::harness
