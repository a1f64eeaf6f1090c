#include "see/exports.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "see/atomic_file.hpp"

namespace see {

namespace {

std::string action_header(const IndexVec& u) {
    std::string s = "u[";
    for (std::size_t i = 0; i < u.size(); ++i) s += (i ? " " : "") + std::to_string(u[i]);
    return s + "]";
}

void write_header(std::ostringstream& os, const DiscreteSystem& system) {
    const auto& labels = system.grid().state_labels;
    for (std::size_t d = 0; d < system.state_dims(); ++d) os << (d ? "," : "") << labels[d];
}

void write_state(std::ostringstream& os, const DiscreteSystem& system, StateId s) {
    const Coord& c = system.state_coord(s);
    for (std::size_t d = 0; d < system.state_dims(); ++d) os << (d ? "," : "") << c[d];
}

template <typename Cell>
std::string per_action_csv(const DiscreteSystem& system, Cell cell) {
    std::ostringstream os;
    write_header(os, system);
    for (ActionId a = 0; a < static_cast<ActionId>(system.num_actions()); ++a)
        os << ',' << action_header(system.action_index(a));
    os << '\n';
    for (StateId s = 0; s < static_cast<StateId>(system.num_states()); ++s) {
        write_state(os, system, s);
        for (ActionId a = 0; a < static_cast<ActionId>(system.num_actions()); ++a)
            os << ',' << cell(system.pair_id(s, a));
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Plane geometry shared by the heatmaps.
struct Plane {
    int width = 1;
    int height = 1;
    DimRange xr{0, 0};
    DimRange yr{0, 0};
    Coord slice{};

    explicit Plane(const DiscreteSystem& system) {
        const auto& ranges = system.grid().state_ranges;
        xr = ranges[0];
        width = xr.size();
        if (ranges.size() > 1) {
            yr = ranges[1];
            height = yr.size();
        }
        for (std::size_t d = 2; d < ranges.size(); ++d)
            slice[d] = ranges[d].contains(0) ? 0 : ranges[d].lo;
    }

    std::optional<StateId> at(const DiscreteSystem& system, int col, int row) const {
        Coord c = slice;
        c[0] = xr.lo + col;
        if (system.state_dims() > 1) c[1] = yr.hi - row;
        return system.find_state(c);
    }

    nlohmann::json describe(const DiscreteSystem& system) const {
        const auto& labels = system.grid().state_labels;
        nlohmann::json j{{"width", width},
                         {"height", height},
                         {"columns", {{"dimension", labels[0]}, {"first", xr.lo}, {"last", xr.hi}}}};
        if (system.state_dims() > 1)
            j["rows"] = {{"dimension", labels[1]}, {"first", yr.hi}, {"last", yr.lo}};
        nlohmann::json fixed = nlohmann::json::object();
        for (std::size_t d = 2; d < system.state_dims(); ++d) fixed[labels[d]] = slice[d];
        j["slice"] = fixed;
        return j;
    }
};

}  // namespace

std::string zone_csv(const FeasibleZone& zone, const DiscreteSystem& system) {
    return per_action_csv(system, [&](PairId p) { return zone.contains(p) ? 1 : 0; });
}

FeasibleZone parse_zone_csv(std::string_view text, const DiscreteSystem& system) {
    const std::size_t dims = system.state_dims(), na = system.num_actions();
    FeasibleZone zone = FeasibleZone::empty_for(system);
    std::vector<std::uint8_t> seen(system.num_states(), 0);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != dims + na)
            throw std::invalid_argument("zone CSV line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(dims + na) + " columns");
        IndexVec idx(dims);
        try {
            for (std::size_t d = 0; d < dims; ++d) idx[d] = std::stoi(cells[d]);
        } catch (const std::exception&) {
            throw std::invalid_argument("zone CSV line " + std::to_string(line_no) + ": bad state index");
        }
        const auto s = system.find_state(idx);
        if (!s) throw std::invalid_argument("zone CSV line " + std::to_string(line_no) + ": unknown state");
        if (seen[*s]++) throw std::invalid_argument("zone CSV line " + std::to_string(line_no) + ": duplicate state");
        for (std::size_t a = 0; a < na; ++a) {
            const auto& v = cells[dims + a];
            if (v == "1")
                zone.insert(system.pair_id(*s, static_cast<ActionId>(a)));
            else if (v != "0")
                throw std::invalid_argument("zone CSV line " + std::to_string(line_no) + ": cells must be 0 or 1");
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw std::invalid_argument("zone CSV does not list every state");
    return zone;
}

std::string horizon_csv(const HorizonField& field, const DiscreteSystem& system) {
    return per_action_csv(system, [&](PairId p) {
        return field.is_infinite(p) ? std::string("inf") : std::to_string(field.at(p));
    });
}

std::string ud_state_csv(const UncertainModel& model, const DiscreteSystem& system) {
    std::ostringstream os;
    write_header(os, system);
    os << ",ud\n";
    for (StateId s = 0; s < static_cast<StateId>(system.num_states()); ++s) {
        write_state(os, system, s);
        os << ',' << state_uncertainty_degree(model, system, s) << '\n';
    }
    return os.str();
}

Heatmap ud_heatmap(const UncertainModel& model, const DiscreteSystem& system) {
    const Plane plane(system);
    std::vector<long long> values(static_cast<std::size_t>(plane.width) * plane.height, 0);
    long long peak = 0;
    for (int row = 0; row < plane.height; ++row)
        for (int col = 0; col < plane.width; ++col)
            if (auto s = plane.at(system, col, row)) {
                const long long v = state_uncertainty_degree(model, system, *s);
                values[static_cast<std::size_t>(row) * plane.width + col] = v;
                peak = std::max(peak, v);
            }
    Heatmap map;
    map.width = plane.width;
    map.height = plane.height;
    map.pixels.resize(values.size());
    const double scale = peak > 0 ? 255.0 / static_cast<double>(peak) : 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        map.pixels[i] = static_cast<std::uint8_t>(std::lround(static_cast<double>(values[i]) * scale));
    map.meta = plane.describe(system);
    map.meta["quantity"] = "state uncertainty degree";
    map.meta["value_min"] = 0;
    map.meta["value_max"] = peak;
    map.meta["pixels_per_unit"] = scale;
    return map;
}

Heatmap region_overlay(const FeasibleZone& zone, const DiscreteSystem& system) {
    const Plane plane(system);
    auto inside = [&](int col, int row) {
        if (col < 0 || row < 0 || col >= plane.width || row >= plane.height) return false;
        const auto s = plane.at(system, col, row);
        return s && zone.state_in_projection(*s);
    };
    Heatmap map;
    map.width = plane.width;
    map.height = plane.height;
    map.pixels.assign(static_cast<std::size_t>(plane.width) * plane.height, 0);
    for (int row = 0; row < plane.height; ++row)
        for (int col = 0; col < plane.width; ++col) {
            if (!inside(col, row)) continue;
            const bool edge =
                !inside(col - 1, row) || !inside(col + 1, row) || !inside(col, row - 1) || !inside(col, row + 1);
            map.pixels[static_cast<std::size_t>(row) * plane.width + col] = edge ? 255 : 128;
        }
    map.meta = plane.describe(system);
    map.meta["quantity"] = "feasible region";
    map.meta["levels"] = {{"outside", 0}, {"inside", 128}, {"boundary", 255}};
    return map;
}

std::string pgm_bytes(const Heatmap& map) {
    std::string out = "P5\n" + std::to_string(map.width) + " " + std::to_string(map.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(map.pixels.data()), map.pixels.size());
    return out;
}

void write_iteration_artifacts(const std::filesystem::path& dir, const FeasibleZone& zone,
                               const UncertainModel& model, const DiscreteSystem& system,
                               const ExportFormats& formats) {
    if (formats.csv) {
        write_file_atomic(dir / "zone.csv", zone_csv(zone, system));
        write_file_atomic(dir / "ud_state.csv", ud_state_csv(model, system));
    }
    if (formats.pgm) {
        const Heatmap ud = ud_heatmap(model, system);
        write_file_atomic(dir / "ud_state.pgm", pgm_bytes(ud));
        write_file_atomic(dir / "ud_state.pgm.json", ud.meta.dump(2) + "\n");
        const Heatmap region = region_overlay(zone, system);
        write_file_atomic(dir / "region.pgm", pgm_bytes(region));
        write_file_atomic(dir / "region.pgm.json", region.meta.dump(2) + "\n");
    }
}

std::vector<std::filesystem::path> iteration_dirs(const std::filesystem::path& run_dir) {
    std::vector<std::pair<long, std::filesystem::path>> found;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(run_dir, ec)) {
        if (!entry.is_directory()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("iter_", 0) != 0) continue;
        const std::string digits = name.substr(5);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) continue;
        found.emplace_back(std::stol(digits), entry.path());
    }
    std::sort(found.begin(), found.end());
    std::vector<std::filesystem::path> out;
    for (auto& f : found) out.push_back(std::move(f.second));
    return out;
}

std::size_t export_artifacts(const std::filesystem::path& run_dir, const DiscreteSystem& system,
                             const ExportFormats& formats) {
    const auto dirs = iteration_dirs(run_dir);
    if (dirs.empty()) throw std::runtime_error("no iteration snapshots under " + run_dir.string());
    for (const auto& dir : dirs) {
        if (!std::filesystem::exists(dir / "zone.csv") || !std::filesystem::exists(dir / "model.json"))
            throw std::runtime_error("snapshot " + dir.string() + " lacks zone.csv or model.json");
        const FeasibleZone zone = parse_zone_csv(read_file(dir / "zone.csv"), system);
        const UncertainModel model = model_from_json(nlohmann::json::parse(read_file(dir / "model.json")), system);
        write_iteration_artifacts(dir, zone, model, system, formats);
    }
    return dirs.size();
}

}  // namespace see
