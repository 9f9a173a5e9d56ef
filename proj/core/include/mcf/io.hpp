#pragma once

// File output: binary portable graymap/pixmap frames, diagnostics and
// contour CSV, plus the readers the tests use to round-trip everything.
//
// Every writer takes `echo` lines (usually serialize_config split into
// lines) and embeds them as `# `-prefixed comments so outputs carry the
// resolved configuration.

#include "mcf/config.hpp"
#include "mcf/geometry.hpp"
#include "mcf/nanowire.hpp"
#include "mcf/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcf {

// byte = nearbyint(255 * clamp(u, 0, 1)); ties round to even.  Rows run
// top-to-bottom with y (axis 0) increasing upward, so substrates sit at the
// bottom of the image.
std::vector<std::uint8_t> render_gray(const Field& f);

// RGB bytes; phases map to blue, red, green (then magenta, cyan, yellow,
// repeating) and mix additively weighted by u_k.
std::vector<std::uint8_t> render_composite(const PhaseState& s);

void write_pgm(const Field& f, const std::string& path,
               const std::vector<std::string>& echo = {});
void write_ppm(const PhaseState& s, const std::string& path,
               const std::vector<std::string>& echo = {});

// <prefix>_u<k>.pgm per phase (1-based) plus the composite <prefix>.ppm.
void write_frame(const PhaseState& s, const std::string& prefix,
                 const std::vector<std::string>& echo = {});

struct RasterImage {
    int width = 0, height = 0, maxval = 0, channels = 1;
    std::vector<std::uint8_t> bytes;
};
RasterImage read_raster(const std::string& path); // P5 or P6

// Columns: t, energy, vol_1..N, lambda_norm, partition_residual, extras;
// %.17g, LF endings, `#` echo block before the header row.
void write_diagnostics(const Diagnostics& d, const std::string& path,
                       const std::vector<std::string>& echo = {});

// Columns: contour, closed, x, y (one row per vertex).
void write_contours(const std::vector<Polyline>& contours, const std::string& path,
                    const std::vector<std::string>& echo = {});

// Columns: alpha, r, h.
std::string profile_csv(const WireProfile& p, const std::vector<std::string>& echo = {});
void write_wire_profile(const WireProfile& p, const std::string& path,
                        const std::vector<std::string>& echo = {});

// Numeric rows of any of the CSVs above (echo and header rows skipped).
std::vector<std::vector<double>> read_csv(const std::string& path);

// serialize_config split into lines, ready to embed as an echo block.
std::vector<std::string> echo_lines(const RunConfig& cfg);

} // namespace mcf
