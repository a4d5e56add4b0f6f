#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pss/analysis.hpp"

namespace pss {

enum class DatasetKind { TransientSet, PssTimeSet, PssSpectrumSet, ConvergenceSet };

/// Column-oriented numeric table with key=value metadata, serialized as CSV
/// with `# key=value` header lines. Numbers round-trip bit-exactly.
struct Dataset {
    DatasetKind kind{};
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, std::string> metadata;
};

bool operator==(const Dataset& a, const Dataset& b);

void write_dataset(const Dataset& ds, const std::filesystem::path& file);
Dataset read_dataset(const std::filesystem::path& file);

/// Split a waveform into a voltage-row dataset and (if any branch rows
/// exist) a branch-current dataset.
struct WaveformDatasets {
    Dataset voltages;
    Dataset currents;
    bool has_currents = false;
};

WaveformDatasets waveform_datasets(const Waveform& wave, DatasetKind kind);
WaveformDatasets spectrum_datasets(const Spectrum& spec);
Dataset convergence_dataset(const ConvergenceReport& rep);

std::string format_double(double v); // 17 significant digits

} // namespace pss
