#include "mcf/solver.hpp"

#include "mcf/errors.hpp"
#include "mcf/smallmat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace mcf {

namespace {

constexpr int kMaxPhases = 16;
constexpr double kPartitionTol = 1e-10;

int thread_budget() {
    static const int n = [] {
        const char* e = std::getenv("MCF_THREADS");
        if (!e) return 1;
        int v = std::atoi(e);
        return v < 1 ? 1 : v;
    }();
    return n;
}

// Per-phase work items are independent; results land in caller-owned slots,
// so the outcome does not depend on the thread count.
template <class F>
void for_each_phase(int n, F&& f) {
    const int tb = std::min(thread_budget(), n);
    if (tb <= 1) {
        for (int k = 0; k < n; ++k) f(k);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(tb);
    for (int t = 0; t < tb; ++t)
        pool.emplace_back([&] {
            for (int k; (k = next.fetch_add(1)) < n;) {
                try {
                    f(k);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace

PhaseState::PhaseState(const Grid& g, double eps, int n_phases) : grid(g), epsilon(eps) {
    fields.assign(n_phases, Field(g));
    validate();
}

void PhaseState::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw ValidationError("state: epsilon must be positive");
    if (n_phases() < 2 || n_phases() > kMaxPhases)
        throw ValidationError("state: phase count must be between 2 and 16");
    for (const Field& f : fields) {
        if (f.grid != grid) throw ValidationError("state: field grids disagree");
        if (f.values.size() != grid.samples())
            throw ValidationError("state: field size does not match grid");
    }
}

void SolverParams::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("params: dt must be positive");
    if (!(alpha > 0.0)) throw ValidationError("params: alpha must be positive");
    if (!(sum_floor > 0.0)) throw ValidationError("params: sum_floor must be positive");
    if (!(linear_tol > 0.0)) throw ValidationError("params: linear_tol must be positive");
}

// --- volume schedules ---

VolumeSchedule VolumeSchedule::free_run(int n_phases) {
    VolumeSchedule v;
    v.modes.assign(n_phases, VolumeMode::Free);
    v.targets.assign(n_phases, 0.0);
    return v;
}

VolumeSchedule VolumeSchedule::from_state(std::vector<VolumeMode> modes, const PhaseState& s,
                                          double c_s) {
    VolumeSchedule v;
    v.modes = std::move(modes);
    v.c_s = c_s;
    v.targets = phase_volumes(s);
    for (std::size_t k = 0; k < v.modes.size(); ++k)
        if (v.modes[k] == VolumeMode::Free) v.targets[k] = 0.0;
    v.validate(s.n_phases(), s.grid.domain_volume());
    return v;
}

bool VolumeSchedule::any_constrained() const {
    for (VolumeMode m : modes)
        if (m != VolumeMode::Free) return true;
    return false;
}

bool VolumeSchedule::all_constrained() const {
    for (VolumeMode m : modes)
        if (m == VolumeMode::Free) return false;
    return !modes.empty();
}

bool VolumeSchedule::has_vls_pair() const {
    return find_mode(VolumeMode::VlsGrow) >= 0;
}

int VolumeSchedule::find_mode(VolumeMode m) const {
    for (std::size_t k = 0; k < modes.size(); ++k)
        if (modes[k] == m) return static_cast<int>(k);
    return -1;
}

void VolumeSchedule::validate(int n_phases, double domain_volume) const {
    if (static_cast<int>(modes.size()) != n_phases)
        throw ValidationError("volume schedule: one mode per phase required");
    if (targets.size() != modes.size())
        throw ValidationError("volume schedule: one target per phase required");
    if (!(c_s >= 0.0) || !std::isfinite(c_s))
        throw ValidationError("volume schedule: c_s must be non-negative");

    int grow = 0, shrink = 0, constant = 0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k] == VolumeMode::VlsGrow) ++grow;
        if (modes[k] == VolumeMode::VlsShrink) ++shrink;
        if (modes[k] == VolumeMode::Constant) ++constant;
        if (modes[k] != VolumeMode::Free) {
            if (!std::isfinite(targets[k]) || targets[k] < 0.0)
                throw ValidationError("volume schedule: targets must be finite and >= 0");
        }
    }
    if (grow > 1 || shrink > 1 || (grow != shrink))
        throw ValidationError("volume schedule: at most one grow/shrink pair, and only paired");
    if (grow == 1 && constant != 1)
        throw ValidationError("volume schedule: the VLS pair needs exactly one Constant phase");

    if (all_constrained()) {
        double sum = 0.0;
        for (double t : targets) sum += t;
        if (std::abs(sum - domain_volume) > 1e-8 * domain_volume)
            throw InconsistentTargets("volume targets of a fully constrained run must fill the domain");
    }
}

VolumeSchedule advance_targets(const VolumeSchedule& v, const PhaseState& s, double dt) {
    if (!v.has_vls_pair()) return v;
    const int grow = v.find_mode(VolumeMode::VlsGrow);
    const int shrink = v.find_mode(VolumeMode::VlsShrink);
    const int liq = v.find_mode(VolumeMode::Constant);

    const double* ul = s.fields[liq].values.data();
    const double* ug = s.fields[grow].values.data();
    double acc = 0.0;
    const std::size_t nc = s.grid.samples();
    for (std::size_t i = 0; i < nc; ++i) acc += ul[i] * ug[i];
    const double inc = dt * (v.c_s / s.epsilon) * acc * s.grid.cell_volume();

    VolumeSchedule out = v;
    out.targets[grow] += inc;
    out.targets[shrink] -= inc;
    if (out.targets[shrink] < 0.0)
        throw TargetUnderflow("shrinking volume target fell below zero");
    return out;
}

// --- energy ---

double energy(const PhaseState& s, const TensionSet& t) {
    s.validate();
    const int n = s.n_phases();
    if (t.n_phases() != n) throw ValidationError("energy: tension set size mismatch");
    const std::vector<double>& sigma = t.per_phase();
    const std::vector<double> lap = laplacian_symbol(s.grid);
    const double vol = s.grid.domain_volume();
    const double cell = s.grid.cell_volume();
    const double eps = s.epsilon;

    std::vector<double> per_phase(n, 0.0);
    for_each_phase(n, [&](int k) {
        SpectralField sf = forward_transform(s.fields[k]);
        double grad2 = 0.0;
        for (std::size_t i = 0; i < sf.coeffs.size(); ++i)
            grad2 += -lap[i] * std::norm(sf.coeffs[i]);
        grad2 *= vol;
        double w = 0.0;
        for (double u : s.fields[k].values) w += well_value(u);
        w *= cell;
        per_phase[k] = sigma[k] * (0.5 * eps * grad2 + w / eps);
    });
    double e = 0.0;
    for (double v : per_phase) e += v;
    return 0.5 * e;
}

// --- step 1 ---

namespace {

// Coupled splitting data for general mobility sets: with B the
// pseudo-inverse of the metric restricted to the complement of (1,...,1)
// and D = diag(sigma), the product B D is diagonalized as Q diag(eigs) Q^-1
// through the symmetric form D^1/2 B D^1/2.
struct GeneralOp {
    detail::Mat q, qinv;
    std::vector<double> eigs;
};

GeneralOp make_general_op(const MobilitySet& m, const std::vector<double>& sigma) {
    const int n = m.n_phases();
    for (double s : sigma)
        if (!(s > 0.0))
            throw ValidationError("general mobility stepping needs positive per-phase tensions");

    detail::Mat proj(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) proj(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / n;
    detail::Mat pap = detail::matmul(proj, detail::matmul(m.metric(), proj));
    detail::SymEigen eig = detail::sym_eigen(pap);

    double top = 1e-300;
    for (double v : eig.values) top = std::max(top, std::abs(v));
    detail::Mat b(n, n);
    for (int k = 0; k < n; ++k) {
        if (eig.values[k] <= 1e-12 * top) continue;
        const double inv = 1.0 / eig.values[k];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) += inv * eig.vectors(i, k) * eig.vectors(j, k);
    }

    detail::Mat c(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c(i, j) = std::sqrt(sigma[i]) * b(i, j) * std::sqrt(sigma[j]);
    detail::SymEigen ec = detail::sym_eigen(c);

    GeneralOp op;
    op.eigs.resize(n);
    op.q = detail::Mat(n, n);
    op.qinv = detail::Mat(n, n);
    for (int k = 0; k < n; ++k) {
        op.eigs[k] = std::max(0.0, ec.values[k]);
        for (int i = 0; i < n; ++i) {
            op.q(i, k) = ec.vectors(i, k) / std::sqrt(sigma[i]);
            op.qinv(k, i) = ec.vectors(i, k) * std::sqrt(sigma[i]);
        }
    }
    return op;
}

PhaseState step_diffusion_additive(const PhaseState& s, const PhaseState* prev,
                                   const std::vector<double>& sigma,
                                   const std::vector<double>& mob, const SolverParams& p) {
    PhaseState out = s;
    const int n = s.n_phases();
    const double eps2 = s.epsilon * s.epsilon;
    for_each_phase(n, [&](int k) {
        const double c = p.dt * mob[k] * sigma[k];
        if (c == 0.0) return; // frozen phases pass through bitwise
        Field rhs(s.grid);
        const double* u = s.fields[k].values.data();
        double* r = rhs.values.data();
        const double fac = c / eps2;
        const std::size_t nc = s.grid.samples();
        for (std::size_t i = 0; i < nc; ++i)
            r[i] = u[i] - fac * (well_derivative(u[i]) - p.alpha * u[i]);
        if (prev) {
            Field inc(s.grid);
            const double* up = prev->fields[k].values.data();
            double* d = inc.values.data();
            for (std::size_t i = 0; i < nc; ++i) d[i] = u[i] - up[i];
            out.fields[k] = solve_semi_implicit(rhs, inc, c, p.alpha, s.epsilon);
        } else {
            out.fields[k] = solve_semi_implicit(rhs, c, p.alpha, s.epsilon);
        }
    });
    out.time = s.time;
    return out;
}

PhaseState step_diffusion_general(const PhaseState& s, const PhaseState* prev,
                                  const GeneralOp& op, const SolverParams& p) {
    const int n = s.n_phases();
    const std::size_t nc = s.grid.samples();
    const double eps2 = s.epsilon * s.epsilon;

    // channel right-hand sides in the eigenbasis
    std::vector<Field> y(n, Field(s.grid));
    for (int i = 0; i < n; ++i) {
        double* yi = y[i].values.data();
        const double lam = op.eigs[i];
        for (int k = 0; k < n; ++k) {
            const double qik = op.qinv(i, k);
            if (qik == 0.0) continue;
            const double* u = s.fields[k].values.data();
            for (std::size_t x = 0; x < nc; ++x) {
                const double ux = u[x];
                yi[x] += qik * (ux - (p.dt * lam / eps2) * (well_derivative(ux) - p.alpha * ux));
            }
        }
    }

    std::vector<Field> ynew(n);
    for_each_phase(n, [&](int i) {
        const double c = p.dt * op.eigs[i];
        if (prev && c != 0.0) {
            Field inc(s.grid);
            double* d = inc.values.data();
            for (int k = 0; k < n; ++k) {
                const double qik = op.qinv(i, k);
                if (qik == 0.0) continue;
                const double* u = s.fields[k].values.data();
                const double* up = prev->fields[k].values.data();
                for (std::size_t x = 0; x < nc; ++x) d[x] += qik * (u[x] - up[x]);
            }
            ynew[i] = solve_semi_implicit(y[i], inc, c, p.alpha, s.epsilon);
        } else {
            ynew[i] = solve_semi_implicit(y[i], c, p.alpha, s.epsilon);
        }
    });

    PhaseState out = s;
    for (int k = 0; k < n; ++k) {
        double* u = out.fields[k].values.data();
        std::fill(u, u + nc, 0.0);
        for (int i = 0; i < n; ++i) {
            const double qki = op.q(k, i);
            if (qki == 0.0) continue;
            const double* yi = ynew[i].values.data();
            for (std::size_t x = 0; x < nc; ++x) u[x] += qki * yi[x];
        }
    }
    return out;
}

} // namespace

PhaseState step_diffusion(const PhaseState& s, const TensionSet& t, const MobilitySet& m,
                          const SolverParams& p) {
    s.validate();
    p.validate();
    if (t.n_phases() != s.n_phases() || m.n_phases() != s.n_phases())
        throw ValidationError("step: tension/mobility set sizes must match the state");

    if (m.kind() == MobilitySet::Kind::HarmonicallyAdditive)
        return step_diffusion_additive(s, nullptr, t.per_phase(), m.per_phase(), p);
    const GeneralOp op = make_general_op(m, t.per_phase());
    return step_diffusion_general(s, nullptr, op, p);
}

PhaseState step_diffusion(const PhaseState& s, const PhaseState& prev, const TensionSet& t,
                          const MobilitySet& m, const SolverParams& p) {
    s.validate();
    p.validate();
    if (t.n_phases() != s.n_phases() || m.n_phases() != s.n_phases())
        throw ValidationError("step: tension/mobility set sizes must match the state");
    if (prev.n_phases() != s.n_phases() || prev.grid != s.grid || prev.epsilon != s.epsilon)
        throw ValidationError("step: previous state must match the current one");

    if (m.kind() == MobilitySet::Kind::HarmonicallyAdditive)
        return step_diffusion_additive(s, &prev, t.per_phase(), m.per_phase(), p);
    const GeneralOp op = make_general_op(m, t.per_phase());
    return step_diffusion_general(s, &prev, op, p);
}

// --- step 2 ---

PhaseState project_partition(const PhaseState& s, const std::vector<double>& mobility,
                             const SolverParams& p, ProjectionStats* stats) {
    s.validate();
    const int n = s.n_phases();
    if (static_cast<int>(mobility.size()) != n)
        throw ValidationError("projection: one mobility per phase required");

    int n_unfrozen = 0;
    for (double m : mobility) {
        if (!(m >= 0.0)) throw ValidationError("projection: mobilities must be >= 0");
        if (m > 0.0) ++n_unfrozen;
    }
    if (n_unfrozen == 0) {
        const double res = partition_residual(s);
        if (res > kPartitionTol)
            throw AllPhasesFrozen("all phases frozen with partition residual " + std::to_string(res));
        if (stats) {
            *stats = ProjectionStats{};
            stats->max_residual_after = res;
        }
        return s;
    }

    PhaseState out = s;
    const std::size_t nc = s.grid.samples();
    const double* in[kMaxPhases];
    double* ov[kMaxPhases];
    for (int k = 0; k < n; ++k) {
        in[k] = s.fields[k].values.data();
        ov[k] = out.fields[k].values.data();
    }

    double lam2 = 0.0, maxres = 0.0;
    std::size_t fallback = 0;
    const double uniform = 1.0 / n_unfrozen;
    for (std::size_t x = 0; x < nc; ++x) {
        double sum = 0.0, S = 0.0;
        double w[kMaxPhases];
        for (int k = 0; k < n; ++k) {
            const double u = in[k][x];
            sum += u;
            w[k] = mobility[k] * sqrt_two_well(u);
            S += w[k];
        }
        const double r = 1.0 - sum;
        if (S >= p.sum_floor) {
            const double lam = r / S;
            lam2 += lam * lam;
            if (lam != 0.0)
                for (int k = 0; k < n; ++k)
                    if (mobility[k] != 0.0) ov[k][x] += lam * w[k];
        } else {
            if (std::abs(r) > kPartitionTol) ++fallback;
            if (r != 0.0) {
                const double add = r * uniform;
                for (int k = 0; k < n; ++k)
                    if (mobility[k] != 0.0) ov[k][x] += add;
            }
        }
        double after = 0.0;
        for (int k = 0; k < n; ++k) after += ov[k][x];
        maxres = std::max(maxres, std::abs(1.0 - after));
    }

    if (stats) {
        *stats = ProjectionStats{};
        stats->lambda_l2 = std::sqrt(lam2 * s.grid.cell_volume());
        stats->max_residual_after = maxres;
        stats->fallback_cells = fallback;
    }
    return out;
}

namespace {

enum class Potential { SqrtWell, CouplingProduct };

struct Constraint {
    int phase;
    Potential pot;
    double target;
};

} // namespace

PhaseState project_partition_volume(const PhaseState& s, const std::vector<double>& mobility,
                                    const VolumeSchedule& v, const SolverParams& p,
                                    ProjectionStats* stats) {
    s.validate();
    const int n = s.n_phases();
    v.validate(n, s.grid.domain_volume());
    if (!v.any_constrained()) return project_partition(s, mobility, p, stats);
    if (static_cast<int>(mobility.size()) != n)
        throw ValidationError("projection: one mobility per phase required");

    const int liq = v.find_mode(VolumeMode::Constant);
    std::vector<Constraint> cons;
    for (int k = 0; k < n; ++k) {
        switch (v.modes[k]) {
        case VolumeMode::Free:
            break;
        case VolumeMode::Constant:
            cons.push_back({k, Potential::SqrtWell, v.targets[k]});
            break;
        case VolumeMode::VlsGrow:
        case VolumeMode::VlsShrink:
            cons.push_back({k, Potential::CouplingProduct, v.targets[k]});
            break;
        }
    }
    const int nc_count = static_cast<int>(cons.size());
    const bool full = v.all_constrained();
    const double domain = s.grid.domain_volume();
    if (full) {
        double sum = 0.0;
        for (const Constraint& c : cons) sum += c.target;
        if (std::abs(sum - domain) > 1e-8 * domain)
            throw InconsistentTargets("constrained volume targets do not fill the domain");
    }

    const std::size_t cells = s.grid.samples();
    const double cell = s.grid.cell_volume();
    const double* in[kMaxPhases];
    for (int k = 0; k < n; ++k) in[k] = s.fields[k].values.data();
    const double* ul = liq >= 0 ? in[liq] : nullptr;

    auto potential = [&](const Constraint& c, std::size_t x) {
        if (c.pot == Potential::SqrtWell) return sqrt_two_well(in[c.phase][x]);
        return in[c.phase][x] * ul[x];
    };

    // gamma_c = Int m_c G_c, d_c = V_c - Int u_c
    std::vector<double> gamma(nc_count, 0.0), defect(nc_count, 0.0);
    for (int c = 0; c < nc_count; ++c) {
        const int k = cons[c].phase;
        double gi = 0.0, vi = 0.0;
        for (std::size_t x = 0; x < cells; ++x) {
            gi += potential(cons[c], x);
            vi += in[k][x];
        }
        gamma[c] = mobility[k] * gi * cell;
        defect[c] = cons[c].target - vi * cell;
        if (std::abs(gamma[c]) < 1e-14 * std::max(1.0, domain))
            throw SingularConstraintSystem("constraint weight integral vanishes for phase " +
                                           std::to_string(k + 1));
    }

    // reduced system (I - A) lambda_bar = b over good cells (S >= eta)
    detail::Mat a(nc_count, nc_count);
    detail::Vec b(nc_count, 0.0);
    for (std::size_t x = 0; x < cells; ++x) {
        double S = 0.0, sum = 0.0;
        double w[kMaxPhases];
        for (int k = 0; k < n; ++k) {
            const double u = in[k][x];
            sum += u;
            w[k] = mobility[k] * sqrt_two_well(u);
            S += w[k];
        }
        if (S < p.sum_floor) continue;
        const double r = 1.0 - sum;
        double gl[kMaxPhases];
        double rx = r;
        for (int c = 0; c < nc_count; ++c) {
            gl[c] = mobility[cons[c].phase] * potential(cons[c], x);
            rx -= defect[c] * gl[c] / gamma[c];
        }
        for (int c = 0; c < nc_count; ++c) {
            const double wc = w[cons[c].phase] / S;
            b[c] += rx * wc;
            for (int k2 = 0; k2 < nc_count; ++k2) a(c, k2) += wc * gl[k2] / gamma[k2];
        }
    }
    for (int c = 0; c < nc_count; ++c) {
        b[c] *= cell;
        for (int k2 = 0; k2 < nc_count; ++k2) a(c, k2) *= cell;
    }

    detail::Mat m(nc_count, nc_count);
    for (int i = 0; i < nc_count; ++i)
        for (int j = 0; j < nc_count; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - a(i, j);

    detail::Vec lambda_bar;
    if (full) {
        // singular by construction: columns of A sum to one; pick the
        // zero-mean solution
        detail::Mat maug(nc_count + 1, nc_count);
        detail::Vec baug(nc_count + 1, 0.0);
        for (int i = 0; i < nc_count; ++i) {
            baug[i] = b[i];
            for (int j = 0; j < nc_count; ++j) maug(i, j) = m(i, j);
        }
        for (int j = 0; j < nc_count; ++j) maug(nc_count, j) = 1.0;
        lambda_bar = detail::least_squares(maug, baug);
    } else {
        lambda_bar = detail::least_squares(m, b);
    }

    // residual scale: targets live on the scale of the domain volume
    detail::Vec resid = detail::matvec(m, lambda_bar);
    double rnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < nc_count; ++i) {
        rnorm = std::max(rnorm, std::abs(resid[i] - b[i]));
        bnorm = std::max(bnorm, std::abs(b[i]));
    }
    if (rnorm > p.linear_tol * std::max(domain, bnorm))
        throw SingularConstraintSystem("constraint system residual " + std::to_string(rnorm));

    std::vector<double> mu(nc_count, 0.0);
    for (int c = 0; c < nc_count; ++c) mu[c] = (defect[c] - lambda_bar[c]) / gamma[c];

    // apply corrections
    PhaseState out = s;
    double* ov[kMaxPhases];
    for (int k = 0; k < n; ++k) ov[k] = out.fields[k].values.data();
    int n_unfrozen = 0;
    for (double mk : mobility)
        if (mk > 0.0) ++n_unfrozen;
    if (n_unfrozen == 0) throw AllPhasesFrozen("volume projection with every phase frozen");
    const double uniform = 1.0 / n_unfrozen;

    double lam2 = 0.0, maxres = 0.0;
    std::size_t fallback = 0;
    for (std::size_t x = 0; x < cells; ++x) {
        double S = 0.0, sum = 0.0;
        double w[kMaxPhases];
        for (int k = 0; k < n; ++k) {
            const double u = in[k][x];
            sum += u;
            w[k] = mobility[k] * sqrt_two_well(u);
            S += w[k];
        }
        const double r = 1.0 - sum;
        if (S >= p.sum_floor) {
            double num = r;
            for (int c = 0; c < nc_count; ++c)
                num -= mu[c] * mobility[cons[c].phase] * potential(cons[c], x);
            const double lam = num / S;
            lam2 += lam * lam;
            if (lam != 0.0)
                for (int k = 0; k < n; ++k)
                    if (mobility[k] != 0.0) ov[k][x] += lam * w[k];
            for (int c = 0; c < nc_count; ++c) {
                const double add = mu[c] * mobility[cons[c].phase] * potential(cons[c], x);
                if (add != 0.0) ov[cons[c].phase][x] += add;
            }
        } else {
            if (std::abs(r) > kPartitionTol) ++fallback;
            if (r != 0.0) {
                const double add = r * uniform;
                for (int k = 0; k < n; ++k)
                    if (mobility[k] != 0.0) ov[k][x] += add;
            }
        }
        double after = 0.0;
        for (int k = 0; k < n; ++k) after += ov[k][x];
        maxres = std::max(maxres, std::abs(1.0 - after));
    }

    double max_vol_err = 0.0;
    for (int c = 0; c < nc_count; ++c) {
        const double* u = ov[cons[c].phase];
        double vi = 0.0;
        for (std::size_t x = 0; x < cells; ++x) vi += u[x];
        max_vol_err = std::max(max_vol_err, std::abs(vi * cell - cons[c].target));
    }
    if (max_vol_err > 10.0 * p.linear_tol * std::max(1.0, domain))
        throw SingularConstraintSystem("volume fidelity lost: error " + std::to_string(max_vol_err));

    if (stats) {
        *stats = ProjectionStats{};
        stats->lambda_l2 = std::sqrt(lam2 * cell);
        stats->max_residual_after = maxres;
        stats->fallback_cells = fallback;
        stats->lambda_bar = lambda_bar;
        stats->mu = mu;
        stats->max_volume_error = max_vol_err;
    }
    return out;
}

// --- run loop ---

double partition_residual(const PhaseState& s) {
    const int n = s.n_phases();
    const std::size_t nc = s.grid.samples();
    const double* in[kMaxPhases];
    for (int k = 0; k < n; ++k) in[k] = s.fields[k].values.data();
    double maxres = 0.0;
    for (std::size_t x = 0; x < nc; ++x) {
        double sum = 0.0;
        for (int k = 0; k < n; ++k) sum += in[k][x];
        maxres = std::max(maxres, std::abs(1.0 - sum));
    }
    return maxres;
}

std::vector<double> phase_volumes(const PhaseState& s) {
    std::vector<double> v(s.n_phases());
    for (int k = 0; k < s.n_phases(); ++k) v[k] = integral(s.fields[k]);
    return v;
}

namespace {

void check_finite(const PhaseState& s, std::size_t step) {
    for (const Field& f : s.fields)
        for (double v : f.values)
            if (!std::isfinite(v))
                throw NonFiniteState("non-finite field value at step " + std::to_string(step));
}

std::size_t count_out_of_range(const PhaseState& s) {
    std::size_t c = 0;
    for (const Field& f : s.fields)
        for (double v : f.values)
            if (v < -0.1 || v > 1.1) ++c;
    return c;
}

} // namespace

RunResult run(PhaseState s, const TensionSet& t, const MobilitySet& m, VolumeSchedule v,
              const SolverParams& p, const RunOptions& opt) {
    s.validate();
    p.validate();
    v.validate(s.n_phases(), s.grid.domain_volume());
    if (t.n_phases() != s.n_phases() || m.n_phases() != s.n_phases())
        throw ValidationError("run: tension/mobility set sizes must match the state");

    // projection weights: per-phase mobilities for additive sets; a general
    // set keeps the partition through the coupled step, so the projection
    // only mops up rounding and uses unit weights
    std::vector<double> proj_mob;
    if (m.kind() == MobilitySet::Kind::HarmonicallyAdditive)
        proj_mob = m.per_phase();
    else
        proj_mob.assign(s.n_phases(), 1.0);

    const double t0 = s.time;
    long long steps = 0;
    if (opt.t_end > t0)
        steps = static_cast<long long>(std::ceil((opt.t_end - t0) / p.dt - 1e-9));
    long long sample_every = 0;
    if (opt.sample_dt > 0.0)
        sample_every = std::max(1LL, std::llround(opt.sample_dt / p.dt));

    Diagnostics diag;
    diag.extra_names = opt.extra_names;
    diag.steps = static_cast<std::size_t>(steps);

    bool warned_range = false;
    auto record = [&](const PhaseState& st, const ProjectionStats& ps) {
        DiagnosticsRow row;
        row.t = st.time;
        row.energy = energy(st, t);
        row.volumes = phase_volumes(st);
        row.lambda_norm = ps.lambda_l2;
        row.partition_residual = ps.max_residual_after;
        if (opt.extra_metrics) row.extra = opt.extra_metrics(st);
        const std::size_t oob = count_out_of_range(st);
        diag.out_of_range_cells += oob;
        if (oob > 0 && !warned_range) {
            std::fprintf(stderr, "warning: %zu samples outside [-0.1, 1.1]\n", oob);
            warned_range = true;
        }
        diag.rows.push_back(row);
        if (opt.on_sample) opt.on_sample(st, diag.rows.back());
    };

    ProjectionStats ps0;
    ps0.max_residual_after = partition_residual(s);
    record(s, ps0);

    const bool vls = v.has_vls_pair();
    const int grow = vls ? v.find_mode(VolumeMode::VlsGrow) : -1;
    double prev_grow_vol = vls ? integral(s.fields[grow]) : 0.0;

    PhaseState prev; // state one step back, once available
    bool have_prev = false;

    for (long long i = 1; i <= steps; ++i) {
        double scheduled_inc = 0.0;
        if (vls) {
            VolumeSchedule adv = advance_targets(v, s, p.dt);
            scheduled_inc = adv.targets[grow] - v.targets[grow];
            v = adv;
        }

        double e_before = 0.0;
        if (opt.track_step_energy) e_before = energy(s, t);

        PhaseState mid = (p.velocity_correction && have_prev) ? step_diffusion(s, prev, t, m, p)
                                                              : step_diffusion(s, t, m, p);
        check_finite(mid, static_cast<std::size_t>(i));

        if (opt.track_step_energy) {
            const double e_mid = energy(mid, t);
            diag.max_step_energy_increase =
                std::max(diag.max_step_energy_increase, e_mid - e_before);
        }

        ProjectionStats ps;
        if (p.velocity_correction) {
            prev = std::move(s);
            have_prev = true;
        }
        s = v.any_constrained() ? project_partition_volume(mid, proj_mob, v, p, &ps)
                                : project_partition(mid, proj_mob, p, &ps);
        s.time = t0 + static_cast<double>(i) * p.dt;

        diag.max_partition_residual = std::max(diag.max_partition_residual, ps.max_residual_after);
        diag.max_fallback_fraction =
            std::max(diag.max_fallback_fraction,
                     static_cast<double>(ps.fallback_cells) / static_cast<double>(s.grid.samples()));
        diag.max_volume_error = std::max(diag.max_volume_error, ps.max_volume_error);
        if (vls) {
            const double gv = integral(s.fields[grow]);
            diag.max_increment_error =
                std::max(diag.max_increment_error, std::abs(gv - prev_grow_vol - scheduled_inc));
            prev_grow_vol = gv;
        }

        if ((sample_every > 0 && i % sample_every == 0) || i == steps) record(s, ps);
    }

    return RunResult{std::move(s), std::move(v), std::move(diag)};
}

} // namespace mcf
