#pragma once

// Periodic uniform grids and the Fourier-side operations the solver needs.
//
// Conventions (fixed across the library):
//   * samples live at x_alpha = i_alpha * h_alpha, i_alpha in [0, K_alpha);
//   * storage is row-major over the axes in declaration order, last axis
//     contiguous;
//   * a field is synthesised as u(x) = sum_k c_k exp(+2 pi i xi_k . x) with
//     xi_k = (k_1/L_1, ..., k_d/L_d) and integer frequencies k_alpha in
//     [-K_alpha/2, K_alpha/2); forward_transform returns the c_k.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace mcf {

class Grid {
  public:
    Grid() = default;
    // sizes.size() in {1,2,3}; every K >= 4; every L > 0.
    Grid(std::vector<int> sizes, std::vector<double> lengths);

    int dim() const { return dim_; }
    int size(int axis) const { return sizes_[axis]; }
    double length(int axis) const { return lengths_[axis]; }
    double spacing(int axis) const { return lengths_[axis] / sizes_[axis]; }
    std::size_t samples() const { return samples_; }
    double cell_volume() const;   // product of spacings
    double domain_volume() const; // product of lengths

    // integer frequency for storage index i on an axis: i < K/2 ? i : i - K
    int freq(int axis, int i) const {
        int k = sizes_[axis];
        return i < (k + 1) / 2 ? i : i - k;
    }
    double xi(int axis, int i) const { return freq(axis, i) / lengths_[axis]; }

    bool operator==(const Grid& o) const;
    bool operator!=(const Grid& o) const { return !(*this == o); }

  private:
    int dim_ = 0;
    std::array<int, 3> sizes_{1, 1, 1};
    std::array<double, 3> lengths_{1.0, 1.0, 1.0};
    std::size_t samples_ = 0;
};

struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), values(g.samples(), 0.0) {}
    Field(const Grid& g, std::vector<double> v);

    // 2D accessor, axis-0 slow / axis-1 contiguous
    double& at(int i0, int i1) { return values[static_cast<std::size_t>(i0) * grid.size(1) + i1]; }
    double at(int i0, int i1) const { return values[static_cast<std::size_t>(i0) * grid.size(1) + i1]; }
};

struct SpectralField {
    Grid grid;
    std::vector<std::complex<double>> coeffs;
};

// Normalized coefficients of a real field (total; f must be finite).
SpectralField forward_transform(const Field& f);

// Synthesis back to samples.  The imaginary residue is discarded after
// checking it stays below 1e-10 of the field scale (debug assert); above
// 1e-6 it throws ImaginaryResidueTooLarge.
Field inverse_transform(const SpectralField& s);

// Multiplier of the periodic Laplacian per stored coefficient:
// -4 pi^2 |xi_k|^2, in storage order.
std::vector<double> laplacian_symbol(const Grid& g);

// Solves (Id - c (Lap - alpha/eps^2 Id)) v = rhs in Fourier space.
// c >= 0; c == 0 returns rhs bitwise.
Field solve_semi_implicit(const Field& rhs, double c, double alpha, double eps);

// Same solve with the operator's action on a known increment added to the
// right-hand side: (Id + c A) v = rhs + c A increment, A = -Lap + alpha/eps^2.
// Used by the time stepper to cancel the drag the implicit operator exerts
// on a steadily moving profile. c == 0 returns rhs bitwise.
Field solve_semi_implicit(const Field& rhs, const Field& increment, double c, double alpha,
                          double eps);

double integral(const Field& f); // cell_volume-weighted sum
double l2_norm(const Field& f);  // sqrt(integral of f^2)

} // namespace mcf
