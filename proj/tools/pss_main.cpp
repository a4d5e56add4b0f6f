#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pss/dataset.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct Cli {
    std::string netlist;
    std::string tper, tstab;
    int max_itr = -1;
    double eps_max = -1.0;
    int steps = -1;
    std::string phase_node;
    std::string out_dir = ".";
    bool seed_transient_only = false;
    bool report = false;
};

void write_pss_outputs(const pss::PssResult& result, const pss::AnalysisCard& card,
                       const std::filesystem::path& base) {
    using namespace pss;
    auto annotate = [&](Dataset& ds) {
        ds.metadata["f0"] = format_double(result.f0);
        ds.metadata["iterations"] = std::to_string(result.iterations);
        if (!result.history.empty())
            ds.metadata["residual"] = format_double(result.history.back().residual);
        ds.metadata["version"] = kVersion;
    };
    auto emit = [&](WaveformDatasets ws, const char* vext, const char* iext) {
        annotate(ws.voltages);
        write_dataset(ws.voltages, base.string() + vext);
        if (ws.has_currents) {
            annotate(ws.currents);
            write_dataset(ws.currents, base.string() + iext);
        }
    };

    if (result.stab_waveform.steps() > 0)
        emit(waveform_datasets(result.stab_waveform, DatasetKind::TransientSet), ".Vt", ".It");
    emit(waveform_datasets(result.pss_waveform, DatasetKind::PssTimeSet), ".Vp", ".Ip");

    const int harmonics = std::min(card.steps_per_period / 2, 50);
    emit(spectrum_datasets(spectrum(result.pss_waveform, result.f0, harmonics)), ".Vpa", ".Ipa");

    ConvergenceReport rep = convergence_report(result.history, result, card.tstab);
    Dataset conv = convergence_dataset(rep);
    annotate(conv);
    write_dataset(conv, base.string() + ".conv");
}

void print_report(const pss::PssResult& result, const pss::AnalysisCard& card) {
    pss::ConvergenceReport rep = pss::convergence_report(result.history, result, card.tstab);
    std::cout << "f0 = " << pss::format_double(result.f0) << " Hz\n"
              << "iterations = " << result.iterations << "\n"
              << "residual = "
              << pss::format_double(result.history.empty() ? 0.0
                                                           : result.history.back().residual)
              << "\n"
              << "delta_f_init = " << rep.delta_f_init << "\n"
              << "K_stab = " << rep.k_stab << "\n"
              << "l0 = " << rep.l0 << "\n";
    if (rep.order_estimate_available)
        std::cout << "sigma_hat = " << rep.sigma_hat << "\n"
                  << "muL_hat = " << rep.muL_hat << "\n";
}

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    CLI::App app{"Periodic steady-state circuit simulator (single-shooting Newton)"};
    app.add_option("netlist", cli.netlist, "netlist file")->required();
    app.add_option("--tper", cli.tper, "initial period guess (s, suffixes ok)");
    app.add_option("--tstab", cli.tstab, "stabilization time (s, suffixes ok)");
    app.add_option("--maxitr", cli.max_itr, "maximum Newton iterations");
    app.add_option("--epsmax", cli.eps_max, "convergence bound on the residual");
    app.add_option("--steps", cli.steps, "time steps per period");
    app.add_option("--phase-node", cli.phase_node, "phase anchoring node");
    app.add_option("--out", cli.out_dir, "output directory");
    app.add_flag("--seed-transient-only", cli.seed_transient_only,
                 "run only DC + stabilization transient");
    app.add_flag("--report", cli.report, "print a convergence summary to stdout");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    }

    using namespace pss;
    try {
        std::ifstream in(cli.netlist);
        if (!in) {
            std::cerr << "error: cannot read " << cli.netlist << "\n";
            return 1;
        }
        std::stringstream buf;
        buf << in.rdbuf();

        Circuit circuit = parse_netlist(buf.str());

        AnalysisCard card;
        card.kind = AnalysisKind::Pss;
        if (const AnalysisCard* pc = circuit.find_analysis(AnalysisKind::Pss)) card = *pc;
        if (!cli.tper.empty()) card.tper = parse_value(cli.tper);
        if (!cli.tstab.empty()) card.tstab = parse_value(cli.tstab);
        if (cli.max_itr >= 0) card.max_itr = cli.max_itr;
        if (cli.eps_max >= 0.0) card.eps_max = cli.eps_max;
        if (cli.steps > 0) card.steps_per_period = cli.steps;
        if (!cli.phase_node.empty()) card.phase_node = cli.phase_node;
        validate_pss_card(card);

        MnaSystem sys(std::move(circuit));
        {
            std::error_code ec;
            std::filesystem::create_directories(cli.out_dir, ec);
            if (ec) throw IoError("cannot create output directory " + cli.out_dir);
        }
        std::filesystem::path base =
            std::filesystem::path(cli.out_dir) /
            std::filesystem::path(cli.netlist).stem();
        ShootingOptions opts = ShootingOptions::from_card(card);

        if (cli.seed_transient_only) {
            Vector x_dc = sys.solve_dc();
            TransientIntegrator integ(sys);
            Waveform stab =
                integ.tran_init(0.0, card.tstab, x_dc, card.tper / card.steps_per_period);
            auto ws = waveform_datasets(stab, DatasetKind::TransientSet);
            write_dataset(ws.voltages, base.string() + ".Vt");
            if (ws.has_currents) write_dataset(ws.currents, base.string() + ".It");
            return 0;
        }

        PssResult result;
        try {
            if (sys.circuit().has_time_dependent_sources()) {
                result = shoot_driven(sys, card.tper, sys.solve_dc(), opts);
            } else {
                result = shoot_autonomous(sys, opts);
            }
        } catch (MaxIterationsError& e) {
            std::cerr << "error: " << e.what() << " (MaxItr=" << card.max_itr << ")\n";
            write_pss_outputs(e.partial, card, base);
            if (cli.report) print_report(e.partial, card);
            return 2;
        }

        write_pss_outputs(result, card, base);
        if (cli.report) print_report(result, card);
        return 0;
    } catch (const SyntaxError& e) {
        std::cerr << cli.netlist << ":" << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const UnknownNodeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const SimError& e) {
        // numerical failures: DC/transient non-convergence, singular systems,
        // model overflow, degenerate oscillation
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
