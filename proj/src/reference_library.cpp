#include <optional>

#include "mmray/materials.hpp"

namespace mmray {
namespace {

struct Row {
    const char* name;
    double frequency_ghz;
    const char* environment;
    std::optional<double> reflection_db;
    std::optional<double> penetration_db;
};

constexpr auto none = std::nullopt;

// Dashes in the source table are stored as absent losses.
const Row kRows[] = {
    {"drywall", 28, "Indoor Office", 6.1, 4.0},
    {"drywall", 140, "Indoor Office", 9.9, 9.2},
    {"drywall", 140, "Factory A", 8.7, 13.1},
    {"drywall", 140, "Factory B", 12.8, 12.7},
    {"drywall", 140, "Factory C", 7.9, none},
    {"drywall", 140, "Factory D", 10.1, 8.0},
    {"glass", 28, "Indoor Office", 3.5, 3.2},
    {"glass", 73, "Outdoor", 5.9, 5.0},
    {"glass", 140, "Indoor Office", 24.5, 7.2},
    {"glass", 140, "Outdoor", 7.4, 3.9},
    {"glass", 140, "Factory A", 9.9, 10.4},
    {"glass", 140, "Factory D", 6.9, none},
    {"thick_glass", 140, "Factory A", 8.4, 23.0},
    {"cubicles_fabric", 28, "Indoor Office", 3.3, none},
    {"cubicles_fabric", 140, "Indoor Office", 8.0, 7.8},
    {"wooden_cupboard", 28, "Indoor Office", 3.5, 2.4},
    {"wooden_cupboard", 140, "Indoor Office", 0.5, 6.1},
    {"display_board", 28, "Indoor Office", 1.1, 11.0},
    {"display_board", 140, "Indoor Office", 8.9, 19.1},
    {"whiteboard", 28, "Indoor Office", 8.3, 11.0},
    {"whiteboard", 140, "Factory D", none, 8.5},
    {"cardboard_box", 140, "Factory C", 4.1, 1.7},
    {"cork_board", 140, "Factory C", 15.3, none},
    {"wood", 140, "Factory D", 4.8, none},
    {"cement_wall", 28, "Outdoor", 11.6, none},
    {"granite", 28, "Outdoor", 6.9, none},
    {"granite", 73, "Outdoor", 5.6, none},
    {"granite", 140, "Outdoor", 13.1, none},
    {"concrete_pillar", 73, "Outdoor", 12.7, none},
    {"concrete_pillar", 140, "Outdoor", 10.3, none},
    {"brick_wall", 73, "Outdoor", 12.8, none},
    {"brick_wall", 140, "Outdoor", 18.9, none},
    {"foliage", 73, "Outdoor", none, 6.1},
    {"foliage", 140, "Outdoor", none, 4.6},
};

}  // namespace

MaterialLibrary reference_library() {
    std::vector<Material> entries;
    entries.reserve(std::size(kRows));
    for (const Row& r : kRows) {
        Material m;
        m.name = r.name;
        m.frequency_ghz = r.frequency_ghz;
        m.environment = r.environment;
        m.reflection_loss_db = r.reflection_db;
        m.penetration_loss_db = r.penetration_db;
        entries.push_back(std::move(m));
    }
    return MaterialLibrary(std::move(entries));
}

}  // namespace mmray
