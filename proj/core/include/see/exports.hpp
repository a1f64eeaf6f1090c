#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "see/feasible_zone.hpp"
#include "see/system.hpp"
#include "see/uncertain_model.hpp"
#include "see/zone.hpp"

namespace see {

/// One row per state (canonical order), the state index columns followed by
/// one 0/1 column per action.
std::string zone_csv(const FeasibleZone& zone, const DiscreteSystem& system);
/// Inverse of zone_csv. Throws std::invalid_argument on a layout mismatch.
FeasibleZone parse_zone_csv(std::string_view text, const DiscreteSystem& system);

/// Same layout as zone_csv with horizon values, "inf" for the sentinel.
std::string horizon_csv(const HorizonField& field, const DiscreteSystem& system);

/// Per-state uncertainty degree summed over actions.
std::string ud_state_csv(const UncertainModel& model, const DiscreteSystem& system);

/// 8-bit grey image over the first two state dimensions. Column c is the
/// first dimension at lo+c, row r the second dimension at hi-r. Further
/// dimensions are fixed at the slice index (0 when inside the range).
struct Heatmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    nlohmann::json meta;
};

/// UD per state scaled linearly so that the largest value maps to 255.
Heatmap ud_heatmap(const UncertainModel& model, const DiscreteSystem& system);
/// 0 outside the feasible region, 128 inside, 255 on its boundary.
Heatmap region_overlay(const FeasibleZone& zone, const DiscreteSystem& system);
/// Binary P5 encoding, maxval 255.
std::string pgm_bytes(const Heatmap& map);

struct ExportFormats {
    bool csv = true;
    bool pgm = false;
};

/// Writes zone.csv, ud_state.csv and optionally the heatmaps into `dir`.
void write_iteration_artifacts(const std::filesystem::path& dir, const FeasibleZone& zone,
                               const UncertainModel& model, const DiscreteSystem& system,
                               const ExportFormats& formats);

/// Re-renders every iter_<k> directory of a finished run from its stored
/// zone.csv and model.json. Returns the number of iterations rendered.
/// Throws std::runtime_error when no snapshot exists.
std::size_t export_artifacts(const std::filesystem::path& run_dir, const DiscreteSystem& system,
                             const ExportFormats& formats);

/// iter_<k> directories of a run, ordered by k.
std::vector<std::filesystem::path> iteration_dirs(const std::filesystem::path& run_dir);

}  // namespace see
