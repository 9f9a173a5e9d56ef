#include "mcf/cli.hpp"

#include "mcf/config.hpp"
#include "mcf/errors.hpp"
#include "mcf/io.hpp"
#include "mcf/nanowire.hpp"
#include "mcf/phase_model.hpp"
#include "mcf/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace mcf {
namespace {

const char* kUsage =
    "usage: mcf <command> [args]\n"
    "  run <config>       simulate; diagnostics, contours and frames go to the\n"
    "                     config's output.dir\n"
    "  validate <config>  parse the config and dry-run every setup check\n"
    "  profile --a A --b B --R0 R [--cap-model paper|geometric]\n"
    "          [--samples N] [--out FILE]\n"
    "                     integrate the sharp-interface wire profile h(r)\n"
    "  oracle <circle|flat|junction>\n"
    "                     print closed-form fixture tables (CSV on stdout)\n";

int fail(const char* category, const std::string& detail, int code) {
    std::cerr << "error: " << category << ": " << detail << "\n";
    return code;
}

int usage_error(const std::string& detail) {
    std::cerr << kUsage;
    return fail("usage", detail, 1);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

double to_double(const std::string& s, const std::string& flag) {
    const char* c = s.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c || *end != '\0') throw ValidationError("bad number for " + flag + ": '" + s + "'");
    return v;
}

int to_int(const std::string& s, const std::string& flag) {
    double v = to_double(s, flag);
    int i = static_cast<int>(v);
    if (i != v) throw ValidationError(flag + " must be an integer");
    return i;
}

// Setup checks shared by `run` and `validate`: everything that can be
// rejected before stepping starts.  Returns the initial state.
PhaseState dry_check(const RunConfig& cfg) {
    Grid g = cfg.make_grid();
    cfg.make_tensions();
    if (cfg.scenario != "vls") cfg.make_mobilities();
    if (cfg.write_frames && g.dim() != 2)
        throw ValidationError("frame output needs a 2D grid");
    cfg.make_params().validate();
    PhaseState s = init_from_shapes(g, cfg.epsilon, cfg.shapes);
    if (!cfg.modes.empty())
        VolumeSchedule::from_state(cfg.modes, s, cfg.c_s).validate(s.n_phases(),
                                                                   g.domain_volume());
    return s;
}

int cmd_validate(const std::string& path) {
    RunConfig cfg = load_config(path);
    dry_check(cfg);
    std::cout << "ok\n";
    return 0;
}

int cmd_run(const std::string& path) {
    RunConfig cfg = load_config(path);
    dry_check(cfg);

    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw Error("cannot create '" + cfg.output_dir + "': " + ec.message());
    auto in_dir = [&](const std::string& name) { return cfg.output_dir + "/" + name; };

    auto echo = echo_lines(cfg);
    {
        std::ofstream out(in_dir("resolved.cfg"), std::ios::binary);
        if (!out) throw Error("cannot open '" + in_dir("resolved.cfg") + "' for writing");
        out << serialize_config(cfg);
        if (!out) throw Error("write failed for '" + in_dir("resolved.cfg") + "'");
    }

    // Each requested frame time is satisfied by the first sample at or past
    // it; filenames carry the requested time.
    std::vector<double> frame_times = cfg.frame_times;
    if (!cfg.write_frames)
        frame_times.clear();
    else if (frame_times.empty())
        frame_times.push_back(cfg.t_end);
    std::sort(frame_times.begin(), frame_times.end());
    std::size_t next_frame = 0;

    RunOptions hooks;
    hooks.track_step_energy = cfg.track_step_energy;
    hooks.on_sample = [&](const PhaseState& s, const DiagnosticsRow&) {
        while (next_frame < frame_times.size() && s.time >= frame_times[next_frame] - 1e-12) {
            write_frame(s, in_dir("frame_t" + fmt_short(frame_times[next_frame])), echo);
            ++next_frame;
        }
    };

    ScenarioRun run = run_scenario(cfg, hooks);

    write_diagnostics(run.merged, in_dir("diagnostics.csv"), echo);
    const PhaseState& final_state = run.final_state();
    if (final_state.grid.dim() >= 2)
        for (int k = 0; k < final_state.n_phases(); ++k)
            write_contours(extract_contour(final_state, k),
                           in_dir("contours_u" + std::to_string(k + 1) + ".csv"), echo);

    const DiagnosticsRow& last = run.merged.rows.back();
    std::cout << "run ok: steps=" << run.merged.steps << " t=" << fmt_short(last.t)
              << " energy=" << fmt_short(last.energy)
              << " max_partition_residual=" << fmt_short(run.merged.max_partition_residual)
              << " outputs=" << cfg.output_dir << "\n";
    return 0;
}

int cmd_profile(const std::vector<std::string>& args) {
    double a = 0, b = 0, r0 = 0;
    bool have_a = false, have_b = false, have_r0 = false;
    CapModel model = CapModel::PaperF;
    int samples = 256;
    std::string out_path;

    for (std::size_t i = 0; i < args.size(); i += 2) {
        const std::string& flag = args[i];
        if (i + 1 >= args.size()) return usage_error("missing value for " + flag);
        const std::string& val = args[i + 1];
        if (flag == "--a") {
            a = to_double(val, flag);
            have_a = true;
        } else if (flag == "--b") {
            b = to_double(val, flag);
            have_b = true;
        } else if (flag == "--R0") {
            r0 = to_double(val, flag);
            have_r0 = true;
        } else if (flag == "--cap-model") {
            if (val == "paper")
                model = CapModel::PaperF;
            else if (val == "geometric")
                model = CapModel::GeometricF;
            else
                return usage_error("unknown cap model '" + val + "'");
        } else if (flag == "--samples") {
            samples = to_int(val, flag);
            if (samples < 2) throw ValidationError("--samples must be >= 2");
        } else if (flag == "--out") {
            out_path = val;
        } else {
            return usage_error("unknown flag '" + flag + "'");
        }
    }
    if (!have_a || !have_b || !have_r0) return usage_error("profile needs --a, --b and --R0");

    WireParams w(a, b, r0, model);
    WireProfile p = integrate_profile(w, samples);

    std::vector<std::string> echo = {
        "a = " + fmt(a),
        "b = " + fmt(b),
        "R0 = " + fmt(r0),
        "cap_model = " + std::string(model == CapModel::PaperF ? "paper" : "geometric"),
        "theta_v = " + fmt(w.angles.theta_v),
        "theta_s = " + fmt(w.angles.theta_s),
        "alpha_stop = " + fmt(p.alpha_stop),
        "reached_stationary = " + std::string(p.reached_stationary ? "true" : "false"),
    };
    if (out_path.empty())
        std::cout << profile_csv(p, echo);
    else
        write_wire_profile(p, out_path, echo);
    return 0;
}

int cmd_oracle(const std::string& table) {
    const double pi = 3.14159265358979323846;
    if (table == "circle") {
        // Sharp-interface shrinkage R(t)^2 = R0^2 - 2 m sigma t for the
        // acceptance radius fits (R0 = 0.3, m = sigma = 1).
        double r0 = 0.3;
        std::cout << "# circle shrinkage: R(t)^2 = R0^2 - 2 t, R0 = 0.3, m = sigma = 1\n"
                  << "t,R2\n";
        for (int i = 0; i <= 6; ++i) {
            double t = 0.005 * i;
            std::cout << fmt(t) << "," << fmt(r0 * r0 - 2.0 * t) << "\n";
        }
        return 0;
    }
    if (table == "flat") {
        // One flat (i,j) layer costs sigma_ij * c_W / 2 per unit area.
        std::cout << "# flat-layer energy per unit area: sigma / 12\n"
                  << "sigma,energy\n";
        for (double sigma : {1.0, 0.5, 0.1})
            std::cout << fmt(sigma) << "," << fmt(0.5 * sigma * profile_constant()) << "\n";
        return 0;
    }
    if (table == "junction") {
        std::cout << "# equilibrium triple-junction sector angles, degrees\n"
                  << "s12,s13,s23,theta1,theta2,theta3\n";
        for (auto sigma : {std::array<double, 3>{1, 1, 1}, std::array<double, 3>{0.1, 1, 1}}) {
            auto th = herring_angles(sigma);
            std::cout << fmt(sigma[0]) << "," << fmt(sigma[1]) << "," << fmt(sigma[2]);
            for (double t : th) std::cout << "," << fmt(t * 180.0 / pi);
            std::cout << "\n";
        }
        return 0;
    }
    return usage_error("unknown oracle table '" + table + "'");
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    if (args.empty()) return usage_error("no command given");
    const std::string& cmd = args[0];
    if (cmd == "help" || cmd == "--help" || cmd == "-h") {
        std::cout << kUsage;
        return 0;
    }

    try {
        if (cmd == "run" || cmd == "validate") {
            if (args.size() != 2) return usage_error(cmd + " takes exactly one config path");
            return cmd == "run" ? cmd_run(args[1]) : cmd_validate(args[1]);
        }
        if (cmd == "profile") return cmd_profile({args.begin() + 1, args.end()});
        if (cmd == "oracle") {
            if (args.size() != 2) return usage_error("oracle takes exactly one table name");
            return cmd_oracle(args[1]);
        }
        return usage_error("unknown command '" + cmd + "'");
    } catch (const ParseError& e) {
        return fail("parse", e.what(), 2);
    } catch (const ValidationError& e) {
        return fail("validation", e.what(), 2);
    } catch (const TriangleViolation& e) {
        return fail("validation", e.what(), 2);
    } catch (const InconsistentMobilityPattern& e) {
        return fail("validation", e.what(), 2);
    } catch (const NotPositiveSemiDefinite& e) {
        return fail("validation", e.what(), 2);
    } catch (const NoWettingEquilibrium& e) {
        return fail("validation", e.what(), 2);
    } catch (const Unrealizable& e) {
        return fail("validation", e.what(), 2);
    } catch (const BadPartition& e) {
        return fail("validation", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("runtime", e.what(), 3);
    }
}

int cli_main(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args);
}

} // namespace mcf
