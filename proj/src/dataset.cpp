#include "pss/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace pss {

namespace {

const char* kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::TransientSet: return "TransientSet";
        case DatasetKind::PssTimeSet: return "PssTimeSet";
        case DatasetKind::PssSpectrumSet: return "PssSpectrumSet";
        case DatasetKind::ConvergenceSet: return "ConvergenceSet";
    }
    return "?";
}

DatasetKind kind_from(const std::string& s) {
    if (s == "TransientSet") return DatasetKind::TransientSet;
    if (s == "PssTimeSet") return DatasetKind::PssTimeSet;
    if (s == "PssSpectrumSet") return DatasetKind::PssSpectrumSet;
    if (s == "ConvergenceSet") return DatasetKind::ConvergenceSet;
    throw IoError("unknown dataset kind '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && s.back() == ' ') s.pop_back();
    }
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool operator==(const Dataset& a, const Dataset& b) {
    return a.kind == b.kind && a.columns == b.columns && a.metadata == b.metadata &&
           a.rows == b.rows;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << "# kind=" << kind_name(ds.kind) << "\n";
    for (const auto& [k, v] : ds.metadata) out << "# " << k << "=" << v << "\n";
    for (size_t i = 0; i < ds.columns.size(); ++i)
        out << (i ? ", " : "") << ds.columns[i];
    out << "\n";
    for (const auto& row : ds.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << (i ? ", " : "") << format_double(row[i]);
        out << "\n";
    }
    if (!out) throw IoError("write failed for " + file.string());
}

Dataset read_dataset(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    Dataset ds;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            while (!body.empty() && body.front() == ' ') body.erase(body.begin());
            auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            std::string key = body.substr(0, eq);
            std::string val = body.substr(eq + 1);
            if (key == "kind")
                ds.kind = kind_from(val);
            else
                ds.metadata[key] = val;
            continue;
        }
        if (!have_header) {
            ds.columns = split_csv(line);
            have_header = true;
            continue;
        }
        auto cells = split_csv(line);
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            try {
                size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw IoError("bad numeric cell '" + c + "' in " + file.string());
            }
        }
        ds.rows.push_back(std::move(row));
    }
    if (!have_header) throw IoError("no header row in " + file.string());
    return ds;
}

WaveformDatasets waveform_datasets(const Waveform& wave, DatasetKind kind) {
    WaveformDatasets out;
    out.voltages.kind = kind;
    out.currents.kind = kind;

    std::vector<int> vrows, irows;
    for (size_t r = 0; r < wave.labels.size(); ++r)
        (wave.labels[r].rfind("v(", 0) == 0 ? vrows : irows).push_back(static_cast<int>(r));
    out.has_currents = !irows.empty();

    out.voltages.columns.push_back("t");
    for (int r : vrows) out.voltages.columns.push_back(wave.labels[static_cast<size_t>(r)]);
    out.currents.columns.push_back("t");
    for (int r : irows) out.currents.columns.push_back(wave.labels[static_cast<size_t>(r)]);

    for (int k = 0; k <= wave.steps(); ++k) {
        const auto& x = wave.samples[static_cast<size_t>(k)];
        std::vector<double> vrow{wave.time(k)}, irow{wave.time(k)};
        for (int r : vrows) vrow.push_back(x(r));
        for (int r : irows) irow.push_back(x(r));
        out.voltages.rows.push_back(std::move(vrow));
        out.currents.rows.push_back(std::move(irow));
    }
    return out;
}

WaveformDatasets spectrum_datasets(const Spectrum& spec) {
    WaveformDatasets out;
    out.voltages.kind = DatasetKind::PssSpectrumSet;
    out.currents.kind = DatasetKind::PssSpectrumSet;
    out.voltages.metadata["f0"] = format_double(spec.f0);
    out.currents.metadata["f0"] = format_double(spec.f0);

    std::vector<int> vrows, irows;
    for (size_t r = 0; r < spec.labels.size(); ++r)
        (spec.labels[r].rfind("v(", 0) == 0 ? vrows : irows).push_back(static_cast<int>(r));
    out.has_currents = !irows.empty();

    auto fill = [&](Dataset& ds, const std::vector<int>& rows) {
        ds.columns.push_back("f");
        for (int r : rows) {
            ds.columns.push_back(spec.labels[static_cast<size_t>(r)]);
            ds.columns.push_back(spec.labels[static_cast<size_t>(r)] + "_dBm");
        }
        for (size_t k = 0; k < spec.freqs.size(); ++k) {
            std::vector<double> row{spec.freqs[k]};
            for (int r : rows) {
                row.push_back(spec.magnitude(r, static_cast<int>(k)));
                row.push_back(spec.dbm(r, static_cast<int>(k)));
            }
            ds.rows.push_back(std::move(row));
        }
    };
    fill(out.voltages, vrows);
    fill(out.currents, irows);
    return out;
}

Dataset convergence_dataset(const ConvergenceReport& rep) {
    Dataset ds;
    ds.kind = DatasetKind::ConvergenceSet;
    ds.columns = {"l", "eps", "delta_f"};
    for (size_t l = 0; l < rep.eps.size(); ++l)
        ds.rows.push_back({static_cast<double>(l), rep.eps[l], rep.delta_f[l]});
    ds.metadata["delta_f_init"] = format_double(rep.delta_f_init);
    ds.metadata["k_stab"] = std::to_string(rep.k_stab);
    ds.metadata["l0"] = std::to_string(rep.l0);
    if (rep.order_estimate_available) {
        ds.metadata["sigma_hat"] = format_double(rep.sigma_hat);
        ds.metadata["muL_hat"] = format_double(rep.muL_hat);
    }
    return ds;
}

} // namespace pss
