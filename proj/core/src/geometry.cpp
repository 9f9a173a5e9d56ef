#include "mcf/geometry.hpp"

#include "mcf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace mcf {

namespace {

double wrap_into(double v, double period) {
    double w = std::fmod(v, period);
    return w < 0.0 ? w + period : w;
}

double axis_min_image(double d, double period) {
    d = std::fmod(d, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

void require_2d(const Grid& g) {
    if (g.dim() != 2) throw ValidationError("operation requires a 2D grid");
}

void require_three_phases_2d(const PhaseState& s) {
    require_2d(s.grid);
    if (s.n_phases() != 3) throw ValidationError("junction diagnostics require exactly 3 phases");
}

// --- marching squares -------------------------------------------------------

// Edge identifiers on the periodic node grid: edge 2*(iy*nx+ix) runs from
// node (iy,ix) toward +x, edge 2*(iy*nx+ix)+1 toward +y.
struct MarchContext {
    const Field* f = nullptr;
    int ny = 0, nx = 0;
    double hy = 0.0, hx = 0.0;
    double level = 0.0;

    double value(int iy, int ix) const { return f->at(iy % ny, ix % nx); }
    bool inside(int iy, int ix) const { return value(iy, ix) >= level; }

    std::uint64_t edge_x(int iy, int ix) const {
        return 2 * (static_cast<std::uint64_t>(iy % ny) * nx + (ix % nx));
    }
    std::uint64_t edge_y(int iy, int ix) const { return edge_x(iy, ix) + 1; }

    Point2 crossing(std::uint64_t id) const {
        auto lin = id / 2;
        int iy = static_cast<int>(lin / nx);
        int ix = static_cast<int>(lin % nx);
        double v0 = value(iy, ix);
        double v1 = (id & 1) ? value(iy + 1, ix) : value(iy, ix + 1);
        double t = (level - v0) / (v1 - v0);
        if (id & 1) return {ix * hx, (iy + t) * hy};
        return {(ix + t) * hx, iy * hy};
    }
};

std::vector<Polyline> march(const Field& f, double level) {
    const Grid& g = f.grid;
    MarchContext ctx{&f, g.size(0), g.size(1), g.spacing(0), g.spacing(1), level};

    // Neighbor pairs per crossing edge; every crossing edge on a periodic
    // grid ends up with exactly two incident segments.
    std::unordered_map<std::uint64_t, std::array<std::uint64_t, 2>> nbr;
    std::unordered_map<std::uint64_t, int> deg;
    auto link = [&](std::uint64_t a, std::uint64_t b) {
        nbr[a][std::min(deg[a], 1)] = b;
        ++deg[a];
        nbr[b][std::min(deg[b], 1)] = a;
        ++deg[b];
    };

    for (int iy = 0; iy < ctx.ny; ++iy) {
        for (int ix = 0; ix < ctx.nx; ++ix) {
            bool b00 = ctx.inside(iy, ix);
            bool b01 = ctx.inside(iy, ix + 1);
            bool b11 = ctx.inside(iy + 1, ix + 1);
            bool b10 = ctx.inside(iy + 1, ix);
            int code = (b00 ? 1 : 0) | (b01 ? 2 : 0) | (b11 ? 4 : 0) | (b10 ? 8 : 0);
            if (code == 0 || code == 15) continue;

            std::uint64_t bottom = ctx.edge_x(iy, ix);
            std::uint64_t top = ctx.edge_x(iy + 1, ix);
            std::uint64_t left = ctx.edge_y(iy, ix);
            std::uint64_t right = ctx.edge_y(iy, ix + 1);

            switch (code) {
            case 1: case 14: link(bottom, left); break;
            case 2: case 13: link(bottom, right); break;
            case 4: case 11: link(top, right); break;
            case 8: case 7: link(top, left); break;
            case 3: case 12: link(left, right); break;
            case 6: case 9: link(bottom, top); break;
            case 5: case 10: {
                double center = 0.25 * (ctx.value(iy, ix) + ctx.value(iy, ix + 1) +
                                        ctx.value(iy + 1, ix + 1) + ctx.value(iy + 1, ix));
                bool join_insides = (center >= level) == (code == 5);
                if (join_insides) {
                    // the two inside corners connect through the center
                    link(left, top);
                    link(bottom, right);
                } else {
                    link(bottom, left);
                    link(top, right);
                }
                break;
            }
            default: break;
            }
        }
    }

    std::vector<Polyline> out;
    std::unordered_map<std::uint64_t, bool> used;
    double lx = g.length(1), ly = g.length(0);

    for (auto& [start, _] : nbr) {
        if (used[start]) continue;
        Polyline pl;
        pl.closed = true;
        std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t cur = start;
        Point2 last{};
        while (true) {
            used[cur] = true;
            Point2 p = ctx.crossing(cur);
            if (pl.pts.empty()) {
                p.x = wrap_into(p.x, lx);
                p.y = wrap_into(p.y, ly);
            } else {
                p.x = last.x + axis_min_image(p.x - last.x, lx);
                p.y = last.y + axis_min_image(p.y - last.y, ly);
            }
            pl.pts.push_back(p);
            last = p;

            auto& nn = nbr[cur];
            std::uint64_t next = (deg[cur] >= 2 && nn[0] == prev) ? nn[1] : nn[0];
            if (deg[cur] < 2) { // degenerate open chain; stop here
                pl.closed = false;
                break;
            }
            prev = cur;
            cur = next;
            if (cur == start) break;
        }
        if (pl.closed && pl.pts.size() >= 2) {
            // repeat the first vertex, shifted to continue the walk; winding
            // loops close onto a lattice translate of the start
            Point2 p0 = pl.pts.front();
            Point2 p{last.x + axis_min_image(p0.x - last.x, lx),
                     last.y + axis_min_image(p0.y - last.y, ly)};
            pl.pts.push_back(p);
        }
        out.push_back(std::move(pl));
    }
    return out;
}

} // namespace

double Polyline::length() const {
    double l = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        l += std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    return l;
}

Point2 Polyline::centroid() const {
    std::size_t n = pts.size();
    if (closed && n > 1) --n; // drop the duplicated endpoint
    Point2 c{};
    if (n == 0) return c;
    for (std::size_t i = 0; i < n; ++i) {
        c.x += pts[i].x;
        c.y += pts[i].y;
    }
    c.x /= static_cast<double>(n);
    c.y /= static_cast<double>(n);
    return c;
}

double Polyline::area() const {
    double a = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        a += pts[i - 1].x * pts[i].y - pts[i].x * pts[i - 1].y;
    return 0.5 * std::abs(a);
}

std::vector<Polyline> extract_contour(const Field& f, double level) {
    require_2d(f.grid);
    return march(f, level);
}

std::vector<Polyline> extract_contour(const PhaseState& s, int phase, double level) {
    if (phase < 0 || phase >= s.n_phases()) throw OutOfRange("phase index out of range");
    const Field& f = s.fields[phase];
    if (s.grid.dim() == 2) return march(f, level);
    if (s.grid.dim() != 3) throw ValidationError("contours require a 2D or 3D state");

    // 3D: per-slice contours across axis 0, (x, y) = (axis 2, axis 1)
    Grid slice_grid({s.grid.size(1), s.grid.size(2)}, {s.grid.length(1), s.grid.length(2)});
    std::vector<Polyline> all;
    std::size_t slice_len = slice_grid.samples();
    for (int i0 = 0; i0 < s.grid.size(0); ++i0) {
        Field slice(slice_grid);
        std::copy_n(f.values.begin() + i0 * slice_len, slice_len, slice.values.begin());
        auto cs = march(slice, level);
        all.insert(all.end(), cs.begin(), cs.end());
    }
    return all;
}

double sample_periodic(const Field& f, Point2 p) {
    require_2d(f.grid);
    const Grid& g = f.grid;
    int ny = g.size(0), nx = g.size(1);
    double fy = p.y / g.spacing(0);
    double fx = p.x / g.spacing(1);
    double iy0 = std::floor(fy), ix0 = std::floor(fx);
    double ty = fy - iy0, tx = fx - ix0;
    int iy = static_cast<int>(wrap_into(iy0, ny));
    int ix = static_cast<int>(wrap_into(ix0, nx));
    int iy1 = (iy + 1) % ny, ix1 = (ix + 1) % nx;
    return (1 - ty) * ((1 - tx) * f.at(iy, ix) + tx * f.at(iy, ix1)) +
           ty * ((1 - tx) * f.at(iy1, ix) + tx * f.at(iy1, ix1));
}

double periodic_distance(const Grid& g, Point2 a, Point2 b) {
    require_2d(g);
    double dx = axis_min_image(a.x - b.x, g.length(1));
    double dy = axis_min_image(a.y - b.y, g.length(0));
    return std::hypot(dx, dy);
}

RadiusStats radius_stats(const Polyline& pl, Point2 center, const Grid& g) {
    std::size_t n = pl.pts.size();
    if (pl.closed && n > 1) --n;
    if (n == 0) throw ValidationError("radius_stats of an empty polyline");
    RadiusStats st;
    st.min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double r = periodic_distance(g, pl.pts[i], center);
        st.mean += r;
        st.min = std::min(st.min, r);
        st.max = std::max(st.max, r);
    }
    st.mean /= static_cast<double>(n);
    return st;
}

namespace {

double point_segment_dist(Point2 p, Point2 a, Point2 b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = p.x - a.x, wy = p.y - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    return std::hypot(wx - t * vx, wy - t * vy);
}

} // namespace

double directed_hausdorff(const std::vector<Polyline>& from, const std::vector<Polyline>& to,
                          const Grid& g) {
    require_2d(g);
    double lx = g.length(1), ly = g.length(0);
    double worst = 0.0;
    for (const auto& pf : from) {
        std::size_t n = pf.pts.size();
        if (pf.closed && n > 1) --n;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& pt : to) {
                for (std::size_t j = 0; j + 1 < pt.pts.size(); ++j) {
                    for (int sx = -1; sx <= 1; ++sx) {
                        for (int sy = -1; sy <= 1; ++sy) {
                            Point2 q{pf.pts[i].x + sx * lx, pf.pts[i].y + sy * ly};
                            best = std::min(best, point_segment_dist(q, pt.pts[j], pt.pts[j + 1]));
                        }
                    }
                }
            }
            if (best > worst && std::isfinite(best)) worst = best;
        }
    }
    return worst;
}

double half_level_radius(const Field& f, Point2 center, double level) {
    require_2d(f.grid);
    const Grid& g = f.grid;
    const Point2 dirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    double acc = 0.0;
    int found = 0;
    for (const auto& d : dirs) {
        double step = d.x != 0.0 ? g.spacing(1) : g.spacing(0);
        int limit = (d.x != 0.0 ? g.size(1) : g.size(0)) / 2;
        double prev = sample_periodic(f, center);
        for (int k = 1; k <= limit; ++k) {
            Point2 p{center.x + k * step * d.x, center.y + k * step * d.y};
            double v = sample_periodic(f, p);
            if (prev >= level && v < level) {
                acc += (k - 1 + (level - prev) / (v - prev)) * step;
                ++found;
                break;
            }
            prev = v;
        }
    }
    if (found == 0) return std::numeric_limits<double>::quiet_NaN();
    return acc / found;
}

double width_10_90(const Field& f, Point2 start, Point2 dir, double max_len) {
    require_2d(f.grid);
    double norm = std::hypot(dir.x, dir.y);
    if (!(norm > 0.0)) throw ValidationError("width_10_90 needs a nonzero direction");
    dir.x /= norm;
    dir.y /= norm;
    double step = 0.25 * std::min(f.grid.spacing(0), f.grid.spacing(1));
    int n = static_cast<int>(std::ceil(max_len / step));
    auto u = [&](int i) {
        return sample_periodic(f, {start.x + i * step * dir.x, start.y + i * step * dir.y});
    };

    auto crossing = [&](int i, int di, double level, int lim) -> double {
        // first crossing of the level walking from sample i in direction di
        double prev = u(i);
        for (int k = i + di; di > 0 ? k <= lim : k >= 0; k += di) {
            double v = u(k);
            if ((prev - level) * (v - level) <= 0.0 && prev != v)
                return (k - di + di * (level - prev) / (v - prev)) * step;
            prev = v;
        }
        return std::numeric_limits<double>::quiet_NaN();
    };

    double prev = u(0);
    for (int i = 1; i <= n; ++i) {
        double v = u(i);
        if ((prev - 0.5) * (v - 0.5) <= 0.0 && prev != v) {
            bool rising = v > prev;
            double lo = crossing(i, -1, rising ? 0.1 : 0.9, n);
            double hi = crossing(i - 1, +1, rising ? 0.9 : 0.1, n);
            if (std::isnan(lo) || std::isnan(hi)) return std::numeric_limits<double>::quiet_NaN();
            return std::abs(hi - lo);
        }
        prev = v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

double min_phase(const PhaseState& s, Point2 p) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& f : s.fields) m = std::min(m, sample_periodic(f, p));
    return m;
}

Point2 refine_junction(const PhaseState& s, Point2 p) {
    // successively finer bilinear scans around the best node
    double h = std::min(s.grid.spacing(0), s.grid.spacing(1));
    double span = h;
    for (int stage = 0; stage < 3; ++stage) {
        Point2 best = p;
        double best_v = min_phase(s, p);
        int m = 8;
        for (int i = -m; i <= m; ++i) {
            for (int j = -m; j <= m; ++j) {
                Point2 q{p.x + span * j / m, p.y + span * i / m};
                double v = min_phase(s, q);
                if (v > best_v) {
                    best_v = v;
                    best = q;
                }
            }
        }
        p = best;
        span /= m;
    }
    return p;
}

} // namespace

Point2 find_junction(const PhaseState& s) {
    require_three_phases_2d(s);
    int ny = s.grid.size(0), nx = s.grid.size(1);
    double best = -1.0;
    Point2 arg{};
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double m = std::min({s.fields[0].at(iy, ix), s.fields[1].at(iy, ix),
                                 s.fields[2].at(iy, ix)});
            if (m > best) {
                best = m;
                arg = {ix * s.grid.spacing(1), iy * s.grid.spacing(0)};
            }
        }
    }
    arg = refine_junction(s, arg);
    if (min_phase(s, arg) < 0.15) throw NoJunction("no point with min_k u_k >= 0.15");
    return arg;
}

std::vector<Point2> find_junctions(const PhaseState& s, double min_separation) {
    require_three_phases_2d(s);
    int ny = s.grid.size(0), nx = s.grid.size(1);
    std::vector<std::pair<double, Point2>> cand;
    auto val = [&](int iy, int ix) {
        iy = (iy % ny + ny) % ny;
        ix = (ix % nx + nx) % nx;
        return std::min({s.fields[0].at(iy, ix), s.fields[1].at(iy, ix), s.fields[2].at(iy, ix)});
    };
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            double m = val(iy, ix);
            // gate below the contact-point floor: node sampling against a
            // frozen profile can dip to ~0.2 even at a genuine junction
            if (m < 0.15) continue;
            bool peak = true;
            for (int di = -1; di <= 1 && peak; ++di)
                for (int dj = -1; dj <= 1 && peak; ++dj)
                    if (di || dj) peak = val(iy + di, ix + dj) <= m;
            if (peak) cand.push_back({m, {ix * s.grid.spacing(1), iy * s.grid.spacing(0)}});
        }
    }
    std::sort(cand.begin(), cand.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Point2> out;
    for (auto& [v, p] : cand) {
        bool ok = true;
        for (const auto& q : out)
            if (periodic_distance(s.grid, p, q) < min_separation) ok = false;
        if (ok) out.push_back(refine_junction(s, p));
    }
    if (out.empty()) throw NoJunction("no point with min_k u_k >= 0.15");
    return out;
}

double SectorAngles::sector_of_phase(int k) const {
    for (int i = 0; i < 3; ++i)
        if (phase[i] == k) return angle[i];
    throw NoJunction("phase owns no sector at this junction");
}

SectorAngles measure_angles(const PhaseState& s, Point2 junction, double radius) {
    require_three_phases_2d(s);
    constexpr int kSamples = 1440;
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

    auto value = [&](int k, double phi) {
        return sample_periodic(s.fields[k],
                               {junction.x + radius * std::cos(phi), junction.y + radius * std::sin(phi)});
    };
    auto dominant = [&](double phi) {
        double u0 = value(0, phi), u1 = value(1, phi), u2 = value(2, phi);
        if (u0 >= u1 && u0 >= u2) return 0;
        return u1 >= u2 ? 1 : 2;
    };

    std::vector<int> dom(kSamples);
    for (int j = 0; j < kSamples; ++j) dom[j] = dominant(kTwoPi * j / kSamples);

    SectorAngles res;
    res.junction = junction;
    int found = 0;
    for (int j = 0; j < kSamples; ++j) {
        int a = dom[j], b = dom[(j + 1) % kSamples];
        if (a == b) continue;
        if (found == 3) throw NoJunction("more than three interfaces on the sampling circle");
        double lo = kTwoPi * j / kSamples, hi = kTwoPi * (j + 1) / kSamples;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (value(a, mid) >= value(b, mid) ? lo : hi) = mid;
        }
        res.boundary[found] = 0.5 * (lo + hi);
        res.phase[found] = b; // sector that opens after this boundary
        ++found;
    }
    if (found != 3) throw NoJunction("expected three interfaces on the sampling circle");

    for (int i = 0; i < 3; ++i) {
        double next = i < 2 ? res.boundary[i + 1] : res.boundary[0] + kTwoPi;
        res.angle[i] = next - res.boundary[i];
    }
    return res;
}

SectorAngles measure_angles(const PhaseState& s) {
    return measure_angles(s, find_junction(s), 5.0 * s.epsilon);
}

} // namespace mcf
