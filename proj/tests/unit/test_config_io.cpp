#include "doctest.h"

#include "mcf/config.hpp"
#include "mcf/errors.hpp"
#include "mcf/geometry.hpp"
#include "mcf/io.hpp"
#include "mcf/phase_model.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace mcf;

namespace {

RunConfig sample_config() {
    RunConfig cfg;
    cfg.grid_sizes = {64, 64};
    cfg.grid_lengths = {1.0, 1.0};
    cfg.epsilon = 1.0 / 64.0;
    cfg.alpha = 2.5;
    cfg.dt = 1.0 / 4096.0;
    cfg.t_end = 0.01;
    cfg.phase_names = {"l", "v", "s"};
    cfg.tensions = {0.85, 0.62, 1.24};
    cfg.mobilities = {1.0, 0.0, 0.0};
    cfg.scenario = "wetting";
    cfg.output_dir = "out/test";
    cfg.sample_dt = 0.0025;
    cfg.frame_times = {0.0, 0.005, 0.01};
    cfg.write_frames = true;

    ShapeSpec droplet;
    droplet.kind = ShapeSpec::Kind::Droplet;
    droplet.center = {0.5, 0.3};
    droplet.radius = 0.2;
    ShapeSpec rest;
    rest.kind = ShapeSpec::Kind::Rest;
    ShapeSpec substrate;
    substrate.kind = ShapeSpec::Kind::Substrate;
    substrate.heights = {{0.0, 0.3}, {1.0, 0.3}};
    cfg.shapes = {droplet, rest, substrate};
    return cfg;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("config serialization round trip is exact") {
    RunConfig cfg = sample_config();
    // awkward numbers must survive the %.17g round trip bit-exactly
    cfg.epsilon = 0.1;
    cfg.dt = 1.0 / 3.0 * 1e-5;
    cfg.linear_tol = 1e-17;

    const std::string text = serialize_config(cfg);
    RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.epsilon == cfg.epsilon);
    CHECK(back.dt == cfg.dt);
    CHECK(back.linear_tol == cfg.linear_tol);
    CHECK(back.phase_names == cfg.phase_names);
    CHECK(back.tensions == cfg.tensions);
    CHECK(back.frame_times == cfg.frame_times);
    CHECK(back.scenario == cfg.scenario);
    REQUIRE(back.shapes.size() == 3);
    CHECK(back.shapes[0].kind == ShapeSpec::Kind::Droplet);
    CHECK(back.shapes[0].radius == 0.2);
    CHECK(back.shapes[2].heights.size() == 2);
    CHECK(back.velocity_correction == cfg.velocity_correction);
}

TEST_CASE("parser reports the offending line") {
    const std::string bad = "grid.sizes = 64, 64\nmodel.epsilon = 0.1\nnot_a_key = 1\n";
    try {
        parse_config(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_config("model.epsilon = zero\n"), ParseError);
    CHECK_THROWS_AS(parse_config("grid.sizes 64\n"), ParseError);

    // comments and blank lines pass
    RunConfig cfg = parse_config("# heading\n\ngrid.sizes = 8\nmodel.epsilon = 0.1\n"
                                 "time.dt = 0.001\ntime.t_end = 0.01\n"
                                 "phases.names = a, b\nphases.tensions = 1\n"
                                 "shape.a.kind = slab\nshape.a.axis = x\n"
                                 "shape.a.range = 0.25, 0.75\nshape.b.kind = rest\n");
    CHECK(cfg.grid_sizes == std::vector<int>{8});
    CHECK(cfg.shapes[0].axis == 'x');
}

TEST_CASE("missing required fields fail validation, not parsing") {
    RunConfig cfg = sample_config();
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(parse_config(serialize_config(cfg)), ValidationError);
}

TEST_CASE("pgm round trip preserves the quantized field") {
    Grid g({32, 48}, {1.0, 1.5});
    Field f(g);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 48; ++j) f.at(i, j) = (i * 48.0 + j) / (32.0 * 48.0);
    f.values[0] = -0.4; // clamps to 0
    f.values[1] = 1.7;  // clamps to 255

    const auto path = temp_file("mcf_test_roundtrip.pgm");
    write_pgm(f, path.string());
    RasterImage img = read_raster(path.string());
    CHECK(img.width == 48);
    CHECK(img.height == 32);
    CHECK(img.channels == 1);
    CHECK(img.maxval == 255);
    std::vector<std::uint8_t> direct = render_gray(f);
    CHECK(img.bytes == direct);
    // rows are flipped so y increases upward: storage row 0 lands last
    CHECK(img.bytes[31 * 48 + 0] == 0);
    CHECK(img.bytes[31 * 48 + 1] == 255);
    std::filesystem::remove(path);
}

TEST_CASE("ppm composite keeps three channels") {
    Grid g({16, 16}, {1.0, 1.0});
    PhaseState s(g, 0.1, 3);
    for (std::size_t x = 0; x < g.samples(); ++x) {
        s.fields[0].values[x] = 0.2;
        s.fields[1].values[x] = 0.5;
        s.fields[2].values[x] = 0.3;
    }
    const auto path = temp_file("mcf_test_roundtrip.ppm");
    write_ppm(s, path.string());
    RasterImage img = read_raster(path.string());
    CHECK(img.channels == 3);
    CHECK(img.bytes == render_composite(s));
    std::filesystem::remove(path);
}

TEST_CASE("diagnostics and contour csv survive a read back") {
    Diagnostics d;
    d.extra_names = {"radius"};
    for (int i = 0; i < 4; ++i) {
        DiagnosticsRow row;
        row.t = i * 0.1;
        row.energy = 1.0 / (i + 1.0);
        row.volumes = {0.3 + i * 1e-17, 0.7};
        row.lambda_norm = 1e-8 * i;
        row.partition_residual = 1e-16;
        row.extra = {0.3 - 0.01 * i};
        d.rows.push_back(row);
    }
    const auto path = temp_file("mcf_test_diag.csv");
    write_diagnostics(d, path.string(), {"# echo = 1"});
    std::vector<std::vector<double>> table = read_csv(path.string());
    REQUIRE(table.size() == 4);
    REQUIRE(table[0].size() == 7); // t, energy, vol x2, lambda, residual, extra
    CHECK(table[2][0] == 0.2);
    CHECK(table[1][2] == 0.3 + 1e-17);
    CHECK(table[3][6] == 0.3 - 0.03);
    std::filesystem::remove(path);

    Polyline pl;
    pl.pts = {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}};
    pl.closed = true;
    const auto cpath = temp_file("mcf_test_contours.csv");
    write_contours({pl}, cpath.string());
    std::vector<std::vector<double>> ct = read_csv(cpath.string());
    REQUIRE(ct.size() == 3);
    CHECK(ct[0] == std::vector<double>{0.0, 1.0, 0.1, 0.2});
    CHECK(ct[2][3] == 0.6);
    std::filesystem::remove(cpath);
}

TEST_CASE("echo lines land in csv headers as comments") {
    RunConfig cfg = sample_config();
    std::vector<std::string> echo = echo_lines(cfg);
    CHECK(!echo.empty());

    Diagnostics d;
    DiagnosticsRow row;
    row.t = 0.0;
    row.energy = 1.0;
    row.volumes = {1.0};
    d.rows.push_back(row);
    const auto path = temp_file("mcf_test_echo.csv");
    write_diagnostics(d, path.string(), echo);

    // the writer prefixes every echo line with "# "
    std::ifstream in(path);
    std::string line;
    std::size_t comments = 0;
    while (std::getline(in, line))
        if (line.rfind("# ", 0) == 0) ++comments;
    CHECK(comments == echo.size());

    // read_csv skips comment lines, so values are still the first row
    std::vector<std::vector<double>> table = read_csv(path.string());
    REQUIRE(table.size() == 1);
    CHECK(table[0][1] == 1.0);
    std::filesystem::remove(path);
}
