#include "mcf/spectral.hpp"

#include "mcf/errors.hpp"

#include <fftw3.h>

#include <cassert>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <map>
#include <numbers>

namespace mcf {

Grid::Grid(std::vector<int> sizes, std::vector<double> lengths) {
    if (sizes.empty() || sizes.size() > 3)
        throw ValidationError("grid: dimension must be 1, 2 or 3");
    if (lengths.size() != sizes.size())
        throw ValidationError("grid: sizes and lengths must have equal rank");
    dim_ = static_cast<int>(sizes.size());
    std::uint64_t total = 1;
    for (int a = 0; a < dim_; ++a) {
        if (sizes[a] < 4)
            throw ValidationError("grid: every axis needs at least 4 samples");
        if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
            throw ValidationError("grid: every axis length must be positive");
        sizes_[a] = sizes[a];
        lengths_[a] = lengths[a];
        total *= static_cast<std::uint64_t>(sizes[a]);
        if (total > (std::uint64_t(1) << 40))
            throw ValidationError("grid: sample count too large");
    }
    samples_ = static_cast<std::size_t>(total);
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
}

double Grid::domain_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= lengths_[a];
    return v;
}

bool Grid::operator==(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (sizes_[a] != o.sizes_[a] || lengths_[a] != o.lengths_[a]) return false;
    return true;
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.samples())
        throw ValidationError("field: value count does not match grid");
}

namespace {

// FFTW plans are cached per (sizes, direction).  Plans are created with
// FFTW_UNALIGNED so they can execute on any caller buffer; creation is
// serialized because the FFTW planner is not thread-safe.
struct PlanCache {
    std::mutex mu;
    std::map<std::pair<std::array<int, 3>, int>, fftw_plan> plans;

    fftw_plan get(const Grid& g, int sign) {
        std::array<int, 3> key{1, 1, 1};
        int n[3];
        for (int a = 0; a < g.dim(); ++a) key[a] = n[a] = g.size(a);
        std::lock_guard<std::mutex> lock(mu);
        auto it = plans.find({key, sign});
        if (it != plans.end()) return it->second;
        std::vector<std::complex<double>> in(g.samples()), out(g.samples());
        fftw_plan p = fftw_plan_dft(g.dim(), n,
                                    reinterpret_cast<fftw_complex*>(in.data()),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans.emplace(std::make_pair(key, sign), p);
        return p;
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void execute(const Grid& g, int sign, const std::complex<double>* in, std::complex<double>* out) {
    fftw_plan p = cache().get(g, sign);
    fftw_execute_dft(p,
                     reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace

SpectralField forward_transform(const Field& f) {
    const std::size_t n = f.grid.samples();
    std::vector<std::complex<double>> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = f.values[i];
    SpectralField s;
    s.grid = f.grid;
    s.coeffs.resize(n);
    execute(f.grid, FFTW_FORWARD, in.data(), s.coeffs.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& c : s.coeffs) c *= scale;
    return s;
}

Field inverse_transform(const SpectralField& s) {
    const std::size_t n = s.grid.samples();
    if (s.coeffs.size() != n)
        throw ValidationError("spectral field: coefficient count does not match grid");
    std::vector<std::complex<double>> out(n);
    execute(s.grid, FFTW_BACKWARD, s.coeffs.data(), out.data());

    Field f(s.grid);
    double max_im = 0.0, max_re = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        f.values[i] = out[i].real();
        max_im = std::max(max_im, std::abs(out[i].imag()));
        max_re = std::max(max_re, std::abs(out[i].real()));
    }
    const double scale = std::max(max_re, 1e-30);
    if (max_im > 1e-6 * scale)
        throw ImaginaryResidueTooLarge("inverse transform: imaginary residue " +
                                       std::to_string(max_im / scale) + " relative");
    assert(max_im <= 1e-10 * scale && "imaginary residue above soft bound");
    return f;
}

std::vector<double> laplacian_symbol(const Grid& g) {
    std::vector<double> sym(g.samples());
    const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
    const int d = g.dim();
    const int k0 = g.size(0), k1 = d > 1 ? g.size(1) : 1, k2 = d > 2 ? g.size(2) : 1;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < k0; ++i0) {
        double x0 = g.xi(0, i0);
        double s0 = x0 * x0;
        for (int i1 = 0; i1 < k1; ++i1) {
            double s1 = s0;
            if (d > 1) {
                double x1 = g.xi(1, i1);
                s1 += x1 * x1;
            }
            for (int i2 = 0; i2 < k2; ++i2, ++idx) {
                double s2 = s1;
                if (d > 2) {
                    double x2 = g.xi(2, i2);
                    s2 += x2 * x2;
                }
                sym[idx] = -four_pi2 * s2;
            }
        }
    }
    return sym;
}

Field solve_semi_implicit(const Field& rhs, double c, double alpha, double eps) {
    if (c < 0.0) throw ValidationError("solve_semi_implicit: c must be >= 0");
    if (!(eps > 0.0)) throw ValidationError("solve_semi_implicit: eps must be positive");
    if (c == 0.0) return rhs;

    SpectralField s = forward_transform(rhs);
    const std::vector<double> lap = laplacian_symbol(rhs.grid);
    const double shift = alpha / (eps * eps);
    for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        s.coeffs[i] /= 1.0 + c * (-lap[i] + shift);
    return inverse_transform(s);
}

Field solve_semi_implicit(const Field& rhs, const Field& increment, double c, double alpha,
                          double eps) {
    if (c < 0.0) throw ValidationError("solve_semi_implicit: c must be >= 0");
    if (!(eps > 0.0)) throw ValidationError("solve_semi_implicit: eps must be positive");
    if (rhs.grid != increment.grid)
        throw ValidationError("solve_semi_implicit: rhs and increment grids differ");
    if (c == 0.0) return rhs;

    SpectralField s = forward_transform(rhs);
    SpectralField d = forward_transform(increment);
    const std::vector<double> lap = laplacian_symbol(rhs.grid);
    const double shift = alpha / (eps * eps);
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
        const double a = c * (-lap[i] + shift);
        s.coeffs[i] = (s.coeffs[i] + a * d.coeffs[i]) / (1.0 + a);
    }
    return inverse_transform(s);
}

double integral(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.cell_volume();
}

double l2_norm(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.cell_volume());
}

} // namespace mcf
