#pragma once

// Line-oriented `section.key = value` run configuration: parsing,
// validation, and canonical serialization (the round-trip identity the
// output echo headers rely on).

#include "mcf/scenarios.hpp"
#include "mcf/solver.hpp"

#include <string>
#include <vector>

namespace mcf {

struct RunConfig {
    // grid
    std::vector<int> grid_sizes;      // required, 1-3 axes
    std::vector<double> grid_lengths; // default: 1 per axis

    // model
    double epsilon = 0.0; // required
    double alpha = 2.5;

    // time
    double dt = 0.0;    // required
    double t_end = 0.0; // required
    double t_growth = 0.2; // vls stage boundary

    // phases
    std::vector<std::string> phase_names;   // required, >= 2, unique
    std::vector<double> tensions;           // pairwise upper triangle
    std::vector<double> tensions_per_phase; // optional explicit decomposition
    std::vector<double> mobilities;         // pairwise; empty = all 1
    bool strict_triangle = true;

    // volume constraints
    std::vector<VolumeMode> modes; // empty = all Free
    double c_s = 0.0;

    // scenario: mcf | wetting | vls
    std::string scenario = "mcf";
    double vls_delta = 0.0; // 0 = 1 / (2 K)

    // shapes, parallel to phase_names
    std::vector<ShapeSpec> shapes;

    // solver
    double sum_floor = 1e-12;
    double linear_tol = 1e-9;
    bool velocity_correction = true;
    bool track_step_energy = false;

    // output
    std::string output_dir = "out";
    double sample_dt = 0.0; // 0: endpoints only
    std::vector<double> frame_times;
    bool write_frames = false;

    bool deterministic = true; // seed-free run; recorded in echo headers

    Grid make_grid() const;
    TensionSet make_tensions() const;
    MobilitySet make_mobilities() const; // scenario defaults applied by runners
    SolverParams make_params() const;
};

// ParseError (with 1-based line number) on malformed lines, unknown keys,
// bad numbers; ValidationError on missing/invalid fields.
RunConfig parse_config(const std::string& text);

// Reads and parses a file; ValidationError when unreadable.
RunConfig load_config(const std::string& path);

// Canonical text form: every resolved field, one `section.key = value` per
// line, numbers in %.17g.  parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& cfg);

} // namespace mcf
