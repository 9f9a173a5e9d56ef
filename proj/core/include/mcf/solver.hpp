#pragma once

// Semi-implicit spectral stepping for the multiphase Allen-Cahn system with
// mobilities in the metric, plus the Lagrange-multiplier projections that
// restore the partition constraint and enforce phase-volume targets.

#include "mcf/phase_model.hpp"
#include "mcf/spectral.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mcf {

struct PhaseState {
    Grid grid;
    double epsilon = 0.0;
    double time = 0.0;
    std::vector<Field> fields;

    PhaseState() = default;
    PhaseState(const Grid& g, double eps, int n_phases);

    int n_phases() const { return static_cast<int>(fields.size()); }
    void validate() const; // grids consistent, eps > 0, >= 2 phases
};

struct SolverParams {
    double dt = 0.0;
    double alpha = 2.5;       // stabilization shift; > 2 gives energy decrease
    double sum_floor = 1e-12; // eta guard on the projection denominator
    double linear_tol = 1e-9; // constraint-system residual tolerance

    // The implicit operator damps the motion of a travelling profile by
    // 1 + dt m sigma (alpha + 1/5) / eps^2, which at dt ~ eps^2 slows
    // interfaces several-fold without shifting equilibria.  When enabled,
    // run() feeds each step the previous increment so the operator's action
    // on the motion cancels, restoring curvature-driven speeds to
    // O((V dt / eps)^2).  Stationary states are unaffected either way.
    bool velocity_correction = true;

    void validate() const;
};

enum class VolumeMode { Free, Constant, VlsGrow, VlsShrink };

// Per-phase volume targets.  VlsGrow/VlsShrink form the coupled pair whose
// targets move by dt * (c_s/epsilon) * integral(u_liquid * u_grow) each step
// (the liquid is the unique Constant phase).
struct VolumeSchedule {
    std::vector<VolumeMode> modes;
    std::vector<double> targets; // used for non-Free phases
    double c_s = 0.0;

    static VolumeSchedule free_run(int n_phases);
    // targets initialized from the current phase volumes
    static VolumeSchedule from_state(std::vector<VolumeMode> modes, const PhaseState& s,
                                     double c_s = 0.0);

    bool any_constrained() const;
    bool all_constrained() const;
    bool has_vls_pair() const;
    int find_mode(VolumeMode m) const; // index or -1
    void validate(int n_phases, double domain_volume) const;
};

// Explicit Euler update of the VLS pair targets; returns the advanced
// schedule.  TargetUnderflow when the shrinking target would go negative.
VolumeSchedule advance_targets(const VolumeSchedule& v, const PhaseState& s, double dt);

// P_eps = 1/2 sum_k sigma_k Int( eps/2 |grad u_k|^2 + W(u_k)/eps ),
// gradient term evaluated spectrally.
double energy(const PhaseState& s, const TensionSet& t);

// Step 1: per-phase semi-implicit diffusion (additive mobility sets), or the
// coupled splitting through the mobility metric restricted to the
// complement of (1,...,1) (general sets).  Phases with m_k * sigma_k = 0 are
// returned bitwise unchanged.
PhaseState step_diffusion(const PhaseState& s, const TensionSet& t, const MobilitySet& m,
                          const SolverParams& p);

// Same step with the drag correction (see SolverParams::velocity_correction):
// the right-hand side gains c A (s - prev), cancelling the implicit
// operator's damping of the increment.  prev must live on the same grid.
PhaseState step_diffusion(const PhaseState& s, const PhaseState& prev, const TensionSet& t,
                          const MobilitySet& m, const SolverParams& p);

struct ProjectionStats {
    double lambda_l2 = 0.0;          // L2 norm of the pointwise multiplier
    double max_residual_after = 0.0; // max |1 - sum_k u_k| post-projection
    std::size_t fallback_cells = 0;  // S < eta while |r| > 1e-10
    std::vector<double> lambda_bar;  // per constrained phase (volume form)
    std::vector<double> mu;          // per constrained phase (volume form)
    double max_volume_error = 0.0;   // max |Int u_c - V_c| post-projection
};

// Step 2: u_k += m_k lambda sqrt(2 W(u_k)) with lambda = (1 - sum u)/S,
// S = sum_k m_k sqrt(2 W(u_k)).  Where S < eta the residual is spread
// uniformly over unfrozen phases.  AllPhasesFrozen when every m_k = 0 but
// the partition residual exceeds 1e-10.
PhaseState project_partition(const PhaseState& s, const std::vector<double>& mobility,
                             const SolverParams& p, ProjectionStats* stats = nullptr);

// Volume-constrained form: u_c gains mu_c m_c G_c for constrained phases
// (G = sqrt(2W(u_c)) for Constant, u_c u_liquid for the VLS pair).  The
// reduced multiplier system (I - A) lambda_bar = b is solved directly; when
// every phase is constrained the system is singular with the flat direction
// in its kernel and the zero-mean row sum lambda_bar = 0 is appended.
// InconsistentTargets when all phases are constrained but the targets do not
// fill the domain; SingularConstraintSystem when the solve residual exceeds
// linear_tol or a constraint weight integral vanishes.
PhaseState project_partition_volume(const PhaseState& s, const std::vector<double>& mobility,
                                    const VolumeSchedule& v, const SolverParams& p,
                                    ProjectionStats* stats = nullptr);

struct DiagnosticsRow {
    double t = 0.0;
    double energy = 0.0;
    std::vector<double> volumes;
    double lambda_norm = 0.0;
    double partition_residual = 0.0;
    std::vector<double> extra;
};

struct Diagnostics {
    std::vector<std::string> extra_names;
    std::vector<DiagnosticsRow> rows;
    std::size_t steps = 0;
    double max_partition_residual = 0.0; // across every step, post-projection
    double max_fallback_fraction = 0.0;
    double max_volume_error = 0.0;       // constrained runs
    double max_increment_error = 0.0;    // VLS pair: realized vs scheduled
    double max_step_energy_increase = 0.0; // only when track_step_energy
    std::size_t out_of_range_cells = 0;    // values outside [-0.1, 1.1] at samples
};

struct RunOptions {
    double t_end = 0.0;
    double sample_dt = 0.0;         // 0: only the first/last states are sampled
    bool track_step_energy = false; // record Step-1 energy monotonicity per step
    std::vector<std::string> extra_names;
    std::function<std::vector<double>(const PhaseState&)> extra_metrics;
    std::function<void(const PhaseState&, const DiagnosticsRow&)> on_sample;
};

struct RunResult {
    PhaseState state;
    VolumeSchedule schedule;
    Diagnostics diag;
};

// Advances targets (VLS pair), then Step 1, then Step 2, until t >= t_end.
// NonFiniteState (with the step index) if the fields stop being finite.
RunResult run(PhaseState s, const TensionSet& t, const MobilitySet& m, VolumeSchedule v,
              const SolverParams& p, const RunOptions& opt);

// Convenience probes used by diagnostics and tests.
double partition_residual(const PhaseState& s); // max |1 - sum u|
std::vector<double> phase_volumes(const PhaseState& s);

} // namespace mcf
