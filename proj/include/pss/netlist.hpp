#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pss/errors.hpp"

namespace pss {

enum class DeviceKind {
    Resistor,
    Capacitor,
    Inductor,
    VSourceDC,
    VSourceSin,
    ISourceDC,
    PolyConductance,
    Diode,
};

/// Two-terminal circuit element with resolved SI-unit parameters.
struct Device {
    DeviceKind kind{};
    std::string name;
    std::vector<std::string> terminals;
    std::map<std::string, double> params;
    int line = 0;
};

enum class AnalysisKind { DC, Tran, Pss };

struct AnalysisCard {
    AnalysisKind kind{};
    // PSS parameters
    double tper = 0.0;
    double tstab = 0.0;
    int max_itr = 10;
    double eps_max = 1e-12;
    int steps_per_period = 256;
    std::string phase_node; // empty: first non-ground node
    // TRAN parameters
    double tstep = 0.0;
    double tstop = 0.0;
    int line = 0;
};

/// Parsed, validated device network. Immutable after construction.
struct Circuit {
    std::string title;
    std::vector<std::string> nodes; // excludes ground "0", order of first appearance
    std::vector<Device> devices;
    std::vector<AnalysisCard> analyses;

    [[nodiscard]] bool has_node(const std::string& name) const;
    [[nodiscard]] bool has_time_dependent_sources() const;
    [[nodiscard]] const AnalysisCard* find_analysis(AnalysisKind kind) const;
};

/// MNA row assignment: one row per non-ground node, one branch-current row
/// per inductor and voltage source.
struct MnaIndexMap {
    std::map<std::string, int> node_rows;   // node name -> row
    std::map<std::string, int> branch_rows; // device name -> row
    std::vector<std::string> labels;        // row -> "v(node)" / "i(dev)"
    int n = 0;

    [[nodiscard]] int node_row(const std::string& name) const;
};

Circuit parse_netlist(const std::string& text);

MnaIndexMap node_index_map(const Circuit& circuit);

/// Serialize back to netlist text; parse(print(c)) == c field-wise.
std::string print_netlist(const Circuit& circuit);

/// Parse a single numeric token with engineering suffixes (f p n u m k meg g).
double parse_value(const std::string& token);

bool operator==(const Device& a, const Device& b);
bool operator==(const AnalysisCard& a, const AnalysisCard& b);
bool operator==(const Circuit& a, const Circuit& b);

/// Validate the hard PSS parameter bounds; throws ValidationError.
void validate_pss_card(const AnalysisCard& card);

} // namespace pss
