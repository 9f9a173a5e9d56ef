#include "mcf/config.hpp"

#include "mcf/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mcf {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& v, int line) {
    const char* s = v.c_str();
    char* end = nullptr;
    double x = std::strtod(s, &end);
    if (end == s || *end != '\0') throw ParseError(line, "malformed number '" + v + "'");
    return x;
}

int parse_int(const std::string& v, int line) {
    const char* s = v.c_str();
    char* end = nullptr;
    long x = std::strtol(s, &end, 10);
    if (end == s || *end != '\0') throw ParseError(line, "malformed integer '" + v + "'");
    return static_cast<int>(x);
}

bool parse_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError(line, "expected true or false, got '" + v + "'");
}

std::vector<double> parse_doubles(const std::string& v, int line) {
    std::vector<double> out;
    for (const auto& p : split_list(v)) out.push_back(parse_double(p, line));
    return out;
}

VolumeMode parse_mode(const std::string& v, int line) {
    if (v == "free") return VolumeMode::Free;
    if (v == "constant") return VolumeMode::Constant;
    if (v == "vls_grow") return VolumeMode::VlsGrow;
    if (v == "vls_shrink") return VolumeMode::VlsShrink;
    throw ParseError(line, "unknown volume mode '" + v + "'");
}

const char* mode_name(VolumeMode m) {
    switch (m) {
    case VolumeMode::Free: return "free";
    case VolumeMode::Constant: return "constant";
    case VolumeMode::VlsGrow: return "vls_grow";
    case VolumeMode::VlsShrink: return "vls_shrink";
    }
    return "free";
}

ShapeSpec::Kind parse_kind(const std::string& v, int line) {
    if (v == "circle") return ShapeSpec::Kind::Circle;
    if (v == "slab") return ShapeSpec::Kind::Slab;
    if (v == "substrate") return ShapeSpec::Kind::Substrate;
    if (v == "droplet") return ShapeSpec::Kind::Droplet;
    if (v == "wire_seed") return ShapeSpec::Kind::WireSeed;
    if (v == "rest") return ShapeSpec::Kind::Rest;
    throw ParseError(line, "unknown shape kind '" + v + "'");
}

const char* kind_name(ShapeSpec::Kind k) {
    switch (k) {
    case ShapeSpec::Kind::Circle: return "circle";
    case ShapeSpec::Kind::Slab: return "slab";
    case ShapeSpec::Kind::Substrate: return "substrate";
    case ShapeSpec::Kind::Droplet: return "droplet";
    case ShapeSpec::Kind::WireSeed: return "wire_seed";
    case ShapeSpec::Kind::Rest: return "rest";
    }
    return "rest";
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T, class F> std::string join(const std::vector<T>& v, F f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += f(v[i]);
    }
    return out;
}

// raw per-shape key/value pairs, resolved after the whole file is read
struct ShapeDraft {
    std::map<std::string, std::pair<std::string, int>> entries; // field -> (value, line)
};

ShapeSpec resolve_shape(const std::string& phase, const ShapeDraft& d) {
    auto get = [&](const char* field) -> const std::pair<std::string, int>* {
        auto it = d.entries.find(field);
        return it == d.entries.end() ? nullptr : &it->second;
    };
    auto require = [&](const char* field) -> const std::pair<std::string, int>& {
        auto* e = get(field);
        if (!e)
            throw ValidationError("shape." + phase + "." + field + " is required for this kind");
        return *e;
    };
    auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [field, ent] : d.entries) {
            bool ok = false;
            for (const char* a : allowed)
                if (field == a) ok = true;
            if (!ok) throw ParseError(ent.second, "key does not apply to this shape kind");
        }
    };

    const auto& kind_ent = require("kind");
    ShapeSpec sh;
    sh.kind = parse_kind(kind_ent.first, kind_ent.second);
    switch (sh.kind) {
    case ShapeSpec::Kind::Circle:
    case ShapeSpec::Kind::Droplet:
    case ShapeSpec::Kind::WireSeed: {
        reject_unknown({"kind", "center", "radius"});
        const auto& c = require("center");
        auto xy = parse_doubles(c.first, c.second);
        if (xy.size() != 2) throw ParseError(c.second, "center needs exactly x, y");
        sh.center = {xy[0], xy[1]};
        const auto& r = require("radius");
        sh.radius = parse_double(r.first, r.second);
        break;
    }
    case ShapeSpec::Kind::Slab: {
        reject_unknown({"kind", "axis", "range"});
        const auto& a = require("axis");
        if (a.first != "x" && a.first != "y")
            throw ParseError(a.second, "axis must be x or y");
        sh.axis = a.first[0];
        const auto& r = require("range");
        auto lohi = parse_doubles(r.first, r.second);
        if (lohi.size() != 2) throw ParseError(r.second, "range needs exactly lo, hi");
        sh.lo = lohi[0];
        sh.hi = lohi[1];
        break;
    }
    case ShapeSpec::Kind::Substrate: {
        reject_unknown({"kind", "heights"});
        const auto& h = require("heights");
        auto vals = parse_doubles(h.first, h.second);
        if (vals.empty() || vals.size() % 2 != 0)
            throw ParseError(h.second, "heights needs x, h pairs");
        for (std::size_t i = 0; i < vals.size(); i += 2)
            sh.heights.push_back({vals[i], vals[i + 1]});
        break;
    }
    case ShapeSpec::Kind::Rest:
        reject_unknown({"kind"});
        break;
    }
    return sh;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, ShapeDraft> shape_drafts;
    std::vector<std::string> shape_order;
    std::set<std::string> seen;
    bool has_write_frames = false;

    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string s = trim(raw);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "empty key");
        if (value.empty()) throw ParseError(line, "empty value for '" + key + "'");
        if (!seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");

        if (key.rfind("shape.", 0) == 0) {
            auto rest = key.substr(6);
            auto dot = rest.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 >= rest.size())
                throw ParseError(line, "shape keys look like shape.<phase>.<field>");
            std::string phase = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            if (!shape_drafts.count(phase)) shape_order.push_back(phase);
            shape_drafts[phase].entries[field] = {value, line};
            continue;
        }

        if (key == "grid.sizes") {
            for (const auto& p : split_list(value)) cfg.grid_sizes.push_back(parse_int(p, line));
        } else if (key == "grid.lengths") {
            cfg.grid_lengths = parse_doubles(value, line);
        } else if (key == "model.epsilon") {
            cfg.epsilon = parse_double(value, line);
        } else if (key == "model.alpha") {
            cfg.alpha = parse_double(value, line);
        } else if (key == "time.dt") {
            cfg.dt = parse_double(value, line);
        } else if (key == "time.t_end") {
            cfg.t_end = parse_double(value, line);
        } else if (key == "time.t_growth") {
            cfg.t_growth = parse_double(value, line);
        } else if (key == "phases.names") {
            cfg.phase_names = split_list(value);
        } else if (key == "phases.tensions") {
            cfg.tensions = parse_doubles(value, line);
        } else if (key == "phases.tensions_per_phase") {
            cfg.tensions_per_phase = parse_doubles(value, line);
        } else if (key == "phases.mobilities") {
            cfg.mobilities = parse_doubles(value, line);
        } else if (key == "phases.strict_triangle") {
            cfg.strict_triangle = parse_bool(value, line);
        } else if (key == "volume.modes") {
            for (const auto& p : split_list(value)) cfg.modes.push_back(parse_mode(p, line));
        } else if (key == "volume.c_s") {
            cfg.c_s = parse_double(value, line);
        } else if (key == "scenario.kind") {
            cfg.scenario = value;
        } else if (key == "scenario.delta") {
            cfg.vls_delta = parse_double(value, line);
        } else if (key == "solver.sum_floor") {
            cfg.sum_floor = parse_double(value, line);
        } else if (key == "solver.linear_tol") {
            cfg.linear_tol = parse_double(value, line);
        } else if (key == "solver.velocity_correction") {
            cfg.velocity_correction = parse_bool(value, line);
        } else if (key == "solver.track_step_energy") {
            cfg.track_step_energy = parse_bool(value, line);
        } else if (key == "output.directory") {
            cfg.output_dir = value;
        } else if (key == "output.sample_dt") {
            cfg.sample_dt = parse_double(value, line);
        } else if (key == "output.frame_times") {
            cfg.frame_times = parse_doubles(value, line);
        } else if (key == "output.write_frames") {
            cfg.write_frames = parse_bool(value, line);
            has_write_frames = true;
        } else if (key == "run.deterministic") {
            cfg.deterministic = parse_bool(value, line);
        } else {
            throw ParseError(line, "unknown key '" + key + "'");
        }
    }
    if (!has_write_frames) cfg.write_frames = !cfg.frame_times.empty();

    // --- semantic validation ---
    if (cfg.grid_sizes.empty()) throw ValidationError("grid.sizes is required");
    if (cfg.grid_sizes.size() > 3) throw ValidationError("grid.sizes supports 1-3 axes");
    for (int k : cfg.grid_sizes)
        if (k < 4) throw ValidationError("grid sizes must be >= 4");
    if (cfg.grid_lengths.empty()) cfg.grid_lengths.assign(cfg.grid_sizes.size(), 1.0);
    if (cfg.grid_lengths.size() != cfg.grid_sizes.size())
        throw ValidationError("grid.lengths must match grid.sizes");
    for (double l : cfg.grid_lengths)
        if (!(l > 0.0)) throw ValidationError("grid lengths must be positive");

    if (!(cfg.epsilon > 0.0)) throw ValidationError("model.epsilon must be positive");
    if (!(cfg.dt > 0.0)) throw ValidationError("time.dt must be positive");
    if (!(cfg.t_end > 0.0)) throw ValidationError("time.t_end must be positive");
    if (!(cfg.sample_dt >= 0.0)) throw ValidationError("output.sample_dt must be >= 0");
    if (!(cfg.c_s >= 0.0)) throw ValidationError("volume.c_s must be >= 0");
    if (!(cfg.sum_floor > 0.0)) throw ValidationError("solver.sum_floor must be positive");
    if (!(cfg.linear_tol > 0.0)) throw ValidationError("solver.linear_tol must be positive");

    const std::size_t n = cfg.phase_names.size();
    if (n < 2) throw ValidationError("phases.names needs at least two phases");
    std::set<std::string> uniq;
    for (const auto& nm : cfg.phase_names) {
        if (nm.empty() || nm.find_first_of(" \t.,=") != std::string::npos)
            throw ValidationError("phase names must be non-empty tokens");
        if (!uniq.insert(nm).second) throw ValidationError("duplicate phase name '" + nm + "'");
    }
    const std::size_t pairs = n * (n - 1) / 2;
    if (cfg.tensions.size() != pairs)
        throw ValidationError("phases.tensions needs the n(n-1)/2 upper-triangle entries");
    if (!cfg.tensions_per_phase.empty() && cfg.tensions_per_phase.size() != n)
        throw ValidationError("phases.tensions_per_phase needs one entry per phase");
    if (!cfg.mobilities.empty() && cfg.mobilities.size() != pairs)
        throw ValidationError("phases.mobilities needs the n(n-1)/2 upper-triangle entries");
    if (!cfg.modes.empty() && cfg.modes.size() != n)
        throw ValidationError("volume.modes needs one entry per phase");

    if (cfg.scenario != "mcf" && cfg.scenario != "wetting" && cfg.scenario != "vls")
        throw ValidationError("scenario.kind must be mcf, wetting, or vls");
    if (cfg.scenario == "vls") {
        if (n != 3) throw ValidationError("vls runs need exactly three phases (L, V, S)");
        if (!cfg.modes.empty())
            throw ValidationError("vls runs define volume.modes themselves; leave it out");
        if (!cfg.mobilities.empty())
            throw ValidationError("vls runs define phases.mobilities themselves; leave it out");
        if (!(cfg.t_growth >= 0.0)) throw ValidationError("time.t_growth must be >= 0");
        if (!(cfg.vls_delta >= 0.0)) throw ValidationError("scenario.delta must be >= 0");
    }

    // shapes, in phase order
    for (const auto& nm : shape_order)
        if (std::find(cfg.phase_names.begin(), cfg.phase_names.end(), nm) ==
            cfg.phase_names.end())
            throw ValidationError("shape given for unknown phase '" + nm + "'");
    cfg.shapes.clear();
    for (const auto& nm : cfg.phase_names) {
        auto it = shape_drafts.find(nm);
        if (it == shape_drafts.end())
            throw ValidationError("phase '" + nm + "' needs a shape.<phase>.kind entry");
        cfg.shapes.push_back(resolve_shape(nm, it->second));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream o;
    o << "grid.sizes = " << join(cfg.grid_sizes, [](int k) { return std::to_string(k); }) << "\n";
    o << "grid.lengths = " << join(cfg.grid_lengths, fmt) << "\n";
    o << "model.epsilon = " << fmt(cfg.epsilon) << "\n";
    o << "model.alpha = " << fmt(cfg.alpha) << "\n";
    o << "time.dt = " << fmt(cfg.dt) << "\n";
    o << "time.t_end = " << fmt(cfg.t_end) << "\n";
    o << "time.t_growth = " << fmt(cfg.t_growth) << "\n";
    o << "phases.names = " << join(cfg.phase_names, [](const std::string& s) { return s; })
      << "\n";
    o << "phases.tensions = " << join(cfg.tensions, fmt) << "\n";
    if (!cfg.tensions_per_phase.empty())
        o << "phases.tensions_per_phase = " << join(cfg.tensions_per_phase, fmt) << "\n";
    if (!cfg.mobilities.empty())
        o << "phases.mobilities = " << join(cfg.mobilities, fmt) << "\n";
    o << "phases.strict_triangle = " << (cfg.strict_triangle ? "true" : "false") << "\n";
    if (!cfg.modes.empty())
        o << "volume.modes = "
          << join(cfg.modes, [](VolumeMode m) { return std::string(mode_name(m)); }) << "\n";
    o << "volume.c_s = " << fmt(cfg.c_s) << "\n";
    o << "scenario.kind = " << cfg.scenario << "\n";
    o << "scenario.delta = " << fmt(cfg.vls_delta) << "\n";
    for (std::size_t k = 0; k < cfg.shapes.size(); ++k) {
        const auto& nm = cfg.phase_names[k];
        const auto& sh = cfg.shapes[k];
        o << "shape." << nm << ".kind = " << kind_name(sh.kind) << "\n";
        switch (sh.kind) {
        case ShapeSpec::Kind::Circle:
        case ShapeSpec::Kind::Droplet:
        case ShapeSpec::Kind::WireSeed:
            o << "shape." << nm << ".center = " << fmt(sh.center.x) << ", " << fmt(sh.center.y)
              << "\n";
            o << "shape." << nm << ".radius = " << fmt(sh.radius) << "\n";
            break;
        case ShapeSpec::Kind::Slab:
            o << "shape." << nm << ".axis = " << sh.axis << "\n";
            o << "shape." << nm << ".range = " << fmt(sh.lo) << ", " << fmt(sh.hi) << "\n";
            break;
        case ShapeSpec::Kind::Substrate: {
            o << "shape." << nm << ".heights = ";
            for (std::size_t i = 0; i < sh.heights.size(); ++i) {
                if (i) o << ", ";
                o << fmt(sh.heights[i].x) << ", " << fmt(sh.heights[i].y);
            }
            o << "\n";
            break;
        }
        case ShapeSpec::Kind::Rest:
            break;
        }
    }
    o << "solver.sum_floor = " << fmt(cfg.sum_floor) << "\n";
    o << "solver.linear_tol = " << fmt(cfg.linear_tol) << "\n";
    o << "solver.velocity_correction = " << (cfg.velocity_correction ? "true" : "false") << "\n";
    o << "solver.track_step_energy = " << (cfg.track_step_energy ? "true" : "false") << "\n";
    o << "output.directory = " << cfg.output_dir << "\n";
    o << "output.sample_dt = " << fmt(cfg.sample_dt) << "\n";
    if (!cfg.frame_times.empty())
        o << "output.frame_times = " << join(cfg.frame_times, fmt) << "\n";
    o << "output.write_frames = " << (cfg.write_frames ? "true" : "false") << "\n";
    o << "run.deterministic = " << (cfg.deterministic ? "true" : "false") << "\n";
    return o.str();
}

Grid RunConfig::make_grid() const {
    if (grid_lengths.empty())
        return Grid(grid_sizes, std::vector<double>(grid_sizes.size(), 1.0));
    return Grid(grid_sizes, grid_lengths);
}

TensionSet RunConfig::make_tensions() const {
    if (!tensions_per_phase.empty()) return TensionSet::from_pairwise(tensions, tensions_per_phase);
    return TensionSet::from_pairwise(tensions, strict_triangle);
}

MobilitySet RunConfig::make_mobilities() const {
    if (mobilities.empty()) {
        std::size_t n = phase_names.size();
        return MobilitySet::from_pairwise(std::vector<double>(n * (n - 1) / 2, 1.0));
    }
    return MobilitySet::from_pairwise(mobilities);
}

SolverParams RunConfig::make_params() const {
    SolverParams p;
    p.dt = dt;
    p.alpha = alpha;
    p.sum_floor = sum_floor;
    p.linear_tol = linear_tol;
    p.velocity_correction = velocity_correction;
    p.validate();
    return p;
}

} // namespace mcf
