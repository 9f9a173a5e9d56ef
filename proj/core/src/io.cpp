#include "mcf/io.hpp"

#include "mcf/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mcf {

namespace {

std::uint8_t quantize(double u) {
    double v = 255.0 * std::clamp(u, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::nearbyint(v));
}

void require_2d(const Grid& g, const char* what) {
    if (g.dim() != 2) throw ValidationError(std::string(what) + " needs a 2D state");
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

void put_echo(std::ostream& out, const std::vector<std::string>& echo) {
    for (const auto& l : echo) out << "# " << l << "\n";
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::vector<std::uint8_t> render_gray(const Field& f) {
    require_2d(f.grid, "render_gray");
    int ny = f.grid.size(0), nx = f.grid.size(1);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(ny) * nx);
    std::size_t o = 0;
    for (int row = 0; row < ny; ++row) {
        int iy = ny - 1 - row; // y increases upward in the image
        for (int ix = 0; ix < nx; ++ix) bytes[o++] = quantize(f.at(iy, ix));
    }
    return bytes;
}

std::vector<std::uint8_t> render_composite(const PhaseState& s) {
    require_2d(s.grid, "render_composite");
    static const int palette[6][3] = {{0, 0, 255},   {255, 0, 0},   {0, 200, 0},
                                      {255, 0, 255}, {0, 255, 255}, {255, 255, 0}};
    int ny = s.grid.size(0), nx = s.grid.size(1);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(ny) * nx * 3);
    std::size_t o = 0;
    for (int row = 0; row < ny; ++row) {
        int iy = ny - 1 - row;
        for (int ix = 0; ix < nx; ++ix) {
            double rgb[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < s.n_phases(); ++k) {
                double u = std::clamp(s.fields[k].at(iy, ix), 0.0, 1.0);
                const int* c = palette[k % 6];
                for (int ch = 0; ch < 3; ++ch) rgb[ch] += u * c[ch];
            }
            for (int ch = 0; ch < 3; ++ch)
                bytes[o++] = static_cast<std::uint8_t>(
                    std::nearbyint(std::clamp(rgb[ch], 0.0, 255.0)));
        }
    }
    return bytes;
}

void write_pgm(const Field& f, const std::string& path, const std::vector<std::string>& echo) {
    auto bytes = render_gray(f);
    auto out = open_out(path, true);
    out << "P5\n";
    put_echo(out, echo);
    out << f.grid.size(1) << " " << f.grid.size(0) << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_ppm(const PhaseState& s, const std::string& path,
               const std::vector<std::string>& echo) {
    auto bytes = render_composite(s);
    auto out = open_out(path, true);
    out << "P6\n";
    put_echo(out, echo);
    out << s.grid.size(1) << " " << s.grid.size(0) << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_frame(const PhaseState& s, const std::string& prefix,
                 const std::vector<std::string>& echo) {
    for (int k = 0; k < s.n_phases(); ++k)
        write_pgm(s.fields[k], prefix + "_u" + std::to_string(k + 1) + ".pgm", echo);
    write_ppm(s, prefix + ".ppm", echo);
}

RasterImage read_raster(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::string magic;
    in >> magic;
    RasterImage img;
    if (magic == "P5")
        img.channels = 1;
    else if (magic == "P6")
        img.channels = 3;
    else
        throw Error("'" + path + "' is not a P5/P6 raster");

    auto next_int = [&]() {
        // skip whitespace and '#' comment lines between header fields
        int c;
        while ((c = in.get()) != EOF) {
            if (c == '#') {
                while ((c = in.get()) != EOF && c != '\n') {
                }
            } else if (!std::isspace(c)) {
                in.unget();
                break;
            }
        }
        int v;
        if (!(in >> v)) throw Error("truncated raster header in '" + path + "'");
        return v;
    };
    img.width = next_int();
    img.height = next_int();
    img.maxval = next_int();
    in.get(); // single whitespace after maxval
    img.bytes.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
    in.read(reinterpret_cast<char*>(img.bytes.data()), img.bytes.size());
    if (static_cast<std::size_t>(in.gcount()) != img.bytes.size())
        throw Error("truncated raster data in '" + path + "'");
    return img;
}

void write_diagnostics(const Diagnostics& d, const std::string& path,
                       const std::vector<std::string>& echo) {
    auto out = open_out(path, false);
    put_echo(out, echo);
    std::size_t nvol = d.rows.empty() ? 0 : d.rows.front().volumes.size();
    out << "t,energy";
    for (std::size_t k = 1; k <= nvol; ++k) out << ",vol_" << k;
    out << ",lambda_norm,partition_residual";
    for (const auto& nm : d.extra_names) out << "," << nm;
    out << "\n";
    for (const auto& r : d.rows) {
        out << fmt(r.t) << "," << fmt(r.energy);
        for (double v : r.volumes) out << "," << fmt(v);
        out << "," << fmt(r.lambda_norm) << "," << fmt(r.partition_residual);
        for (double v : r.extra) out << "," << fmt(v);
        out << "\n";
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

void write_contours(const std::vector<Polyline>& contours, const std::string& path,
                    const std::vector<std::string>& echo) {
    auto out = open_out(path, false);
    put_echo(out, echo);
    out << "contour,closed,x,y\n";
    for (std::size_t c = 0; c < contours.size(); ++c)
        for (const auto& p : contours[c].pts)
            out << c << "," << (contours[c].closed ? 1 : 0) << "," << fmt(p.x) << ","
                << fmt(p.y) << "\n";
    if (!out) throw Error("write failed for '" + path + "'");
}

std::string profile_csv(const WireProfile& p, const std::vector<std::string>& echo) {
    std::ostringstream out;
    put_echo(out, echo);
    out << "alpha,r,h\n";
    for (const auto& s : p.samples)
        out << fmt(s.alpha) << "," << fmt(s.r) << "," << fmt(s.h) << "\n";
    return out.str();
}

void write_wire_profile(const WireProfile& p, const std::string& path,
                        const std::vector<std::string>& echo) {
    auto out = open_out(path, false);
    out << profile_csv(p, echo);
    if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        bool numeric = true;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            auto comma = line.find(',', pos);
            std::string tok = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                          : comma - pos);
            const char* s = tok.c_str();
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end == s || *end != '\0') {
                numeric = false;
                break;
            }
            row.push_back(v);
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (numeric && !row.empty()) rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> echo_lines(const RunConfig& cfg) {
    std::vector<std::string> lines;
    std::istringstream in(serialize_config(cfg));
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

} // namespace mcf
