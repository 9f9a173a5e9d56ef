#pragma once

// Double-well, interface profile, and the surface-tension / mobility algebra
// for N-phase systems.

#include "mcf/smallmat.hpp"

#include <array>
#include <optional>
#include <vector>

namespace mcf {

// W(s) = 1/2 s^2 (1-s)^2
double well_value(double s);
// W'(s) = s (1-s) (1-2s)
double well_derivative(double s);
// sqrt(2 W(s)) = |s (1-s)|  (absolute-value branch, valid outside [0,1] too)
double sqrt_two_well(double s);

// Solution of q' = -sqrt(2 W(q)), q(0) = 1/2: q(s) = 1 / (1 + e^s).
double optimal_profile(double s);

// c_W = Integral_0^1 sqrt(2 W) ds = 1/6.  Flat-interface energy per unit
// area of one (i,j) layer is (sigma_i + sigma_j)/2 * c_W.
double profile_constant();

// Per-phase tensions from pairwise ones for 3 phases:
// sigma_i = (sigma_ij + sigma_ik - sigma_jk)/2.  Throws TriangleViolation
// when a strict triangle violation makes some sigma_i < -1e-12.
// Pairwise order: (s12, s13, s23).
std::vector<double> additive_decompose(const std::vector<double>& pairwise3);

// Per-phase mobilities from pairwise ones (1/m_ij = 1/m_i + 1/m_j) for
// 3 phases.  nullopt = not harmonically additive (some 1/m_i < 0 or an
// infinite per-phase coefficient would be required).  Zero-pattern rules:
//   * m_ij = m_ik = 0, m_jk > 0  ->  m_i = 0 and m_j = m_k = 2 m_jk;
//   * all zero                   ->  all m_i = 0;
//   * a single vanishing pair    ->  InconsistentMobilityPattern.
std::optional<std::vector<double>> harmonic_decompose(const std::vector<double>& pairwise3);

// Young contact angle: cos(theta) = (sigma_SV - sigma_LS) / sigma_VL.
// Throws NoWettingEquilibrium when |cos| > 1.
double young_angle(double sigma_sv, double sigma_ls, double sigma_vl);

// Equilibrium sector angles (theta_1, theta_2, theta_3) of a triple
// junction with pairwise tensions (s12, s13, s23): the tension vectors
// close a triangle, so theta_k = pi - (interior angle between the two
// interfaces meeting phase k).  Unrealizable when the tensions violate
// the strict triangle inequality (no junction; wetting regime).
std::array<double, 3> herring_angles(const std::array<double, 3>& sigma);

// Pairwise symmetric matrix stored as the upper triangle in row order:
// n=3 -> (a12, a13, a23).
std::vector<double> upper_triangle(const detail::Mat& m);
detail::Mat from_upper_triangle(int n, const std::vector<double>& tri);

class TensionSet {
  public:
    // Pairwise tensions; per-phase coefficients derived for n == 2 (even
    // split) and n == 3 (additive decomposition); for n > 3 they must be
    // supplied.  strict_triangle controls whether violations throw.
    static TensionSet from_pairwise(const std::vector<double>& tri, bool strict_triangle = true);
    static TensionSet from_pairwise(const std::vector<double>& tri,
                                    const std::vector<double>& per_phase);

    int n_phases() const { return n_; }
    double pairwise(int i, int j) const;
    const std::vector<double>& per_phase() const { return per_phase_; }

  private:
    int n_ = 0;
    detail::Mat pair_;
    std::vector<double> per_phase_;
};

class MobilitySet {
  public:
    enum class Kind { HarmonicallyAdditive, General };

    // From per-phase coefficients (all >= 0); pairwise filled in by the
    // harmonic rule 1/m_ij = 1/m_i + 1/m_j (0 when either phase is frozen).
    static MobilitySet from_per_phase(const std::vector<double>& m);
    // From pairwise coefficients: harmonic decomposition when possible
    // (n <= 3), otherwise the coupled General form.  The General metric is
    // the system matrix with zero diagonal and off-diagonal -1/m_ij; it must
    // be positive semi-definite on the complement of (1,...,1)
    // (NotPositiveSemiDefinite otherwise).
    static MobilitySet from_pairwise(const std::vector<double>& tri);
    static MobilitySet general_from_pairwise(const std::vector<double>& tri);

    int n_phases() const { return n_; }
    Kind kind() const { return kind_; }
    double pairwise(int i, int j) const;
    // valid only for HarmonicallyAdditive
    const std::vector<double>& per_phase() const;
    // valid only for General
    const detail::Mat& metric() const { return metric_; }

  private:
    int n_ = 0;
    Kind kind_ = Kind::HarmonicallyAdditive;
    detail::Mat pair_;
    std::vector<double> per_phase_;
    detail::Mat metric_;
};

} // namespace mcf
