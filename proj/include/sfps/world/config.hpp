#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sfps/core.hpp"

namespace sfps::world {

struct Point {
    double x = 0.0, y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Daily bird attack pattern: two Gaussian bumps, the larger one in the morning.
struct AttackPattern {
    double morning_amplitude = 0.9;
    double morning_peak = 540.0;  // 9 AM
    double morning_sigma = 90.0;
    double afternoon_amplitude = 0.5;
    double afternoon_peak = 900.0;  // 3 PM
    double afternoon_sigma = 90.0;
};

struct WorldConfig {
    Tick ticks_per_day = 1440;
    Tick run_length = 1440;
    int n_drones = 12;
    int n_birds = 100;

    double field_width = 100.0;
    double field_height = 100.0;
    int cells_x = 10;
    int cells_y = 10;
    /// Explicit hover points; empty means a generated grid with one point per drone.
    std::vector<Point> hover_points;

    Point charger_position{0.0, 0.0};
    int charger_slots = 7;

    double drone_speed = 2.0;
    double moving_consumption = 0.0045;
    double hovering_consumption = 0.0025;
    double charging_rate = 1.0 / 200.0;

    double scare_radius = 20.0;
    double bird_damage_per_tick = 0.001;
    double bird_activity = 0.02;
    int flee_cooldown = 15;
    double attack_duration = 30.0;  // mean ticks an undisturbed bird keeps attacking; 0 = until scared
    AttackPattern attack;

    std::uint64_t seed = 1;

    void validate() const {
        require_config(ticks_per_day >= 1, "ticks_per_day must be >= 1");
        require_config(run_length >= 0, "run_length must be >= 0");
        require_config(n_drones >= 1, "n_drones must be >= 1");
        require_config(n_birds >= 0, "n_birds must be >= 0");
        require_config(field_width > 0 && field_height > 0, "field dimensions must be positive");
        require_config(cells_x >= 1 && cells_y >= 1, "cell grid must be non-empty");
        require_config(charger_slots >= 1, "charger slots must be >= 1");
        require_config(drone_speed > 0, "drone_speed must be positive");
        require_config(hovering_consumption > 0 && hovering_consumption < moving_consumption,
                       "need 0 < hovering consumption < moving consumption");
        require_config(moving_consumption < 1, "moving consumption must be < 1");
        require_config(charging_rate > 0 && charging_rate <= 1, "charging rate must be in (0,1]");
        require_config(scare_radius >= 0, "scare radius must be >= 0");
        require_config(bird_damage_per_tick >= 0, "bird damage must be >= 0");
        require_config(bird_activity >= 0, "bird activity must be >= 0");
        require_config(flee_cooldown >= 1, "flee cooldown must be >= 1");
        require_config(attack_duration == 0.0 || attack_duration >= 1.0, "attack duration must be 0 or >= 1");
        require_config(attack.morning_sigma > 0 && attack.afternoon_sigma > 0, "attack sigmas must be positive");
        require_config(attack.morning_amplitude > attack.afternoon_amplitude && attack.afternoon_amplitude >= 0,
                       "morning peak must be the larger one");
        if (!hover_points.empty())
            require_config(static_cast<int>(hover_points.size()) >= n_drones, "more drones than hover points");
    }

    /// Hover points actually used: explicit ones, or a near-square grid with
    /// n_drones cells laid over the field.
    [[nodiscard]] std::vector<Point> resolved_hover_points() const {
        if (!hover_points.empty()) return hover_points;
        int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_drones) * field_width / field_height)));
        cols = std::max(cols, 1);
        const int rows = (n_drones + cols - 1) / cols;
        std::vector<Point> pts;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols && static_cast<int>(pts.size()) < n_drones; ++c)
                pts.push_back({(c + 0.5) * field_width / cols, (r + 0.5) * field_height / rows});
        return pts;
    }

    [[nodiscard]] Point cell_center(int cell) const {
        const int cx = cell % cells_x, cy = cell / cells_x;
        return {(cx + 0.5) * field_width / cells_x, (cy + 0.5) * field_height / cells_y};
    }

    [[nodiscard]] int cell_count() const { return cells_x * cells_y; }
};

}  // namespace sfps::world
