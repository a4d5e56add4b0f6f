#include "pss/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <queue>
#include <set>
#include <sstream>

namespace pss {

namespace {

std::string to_upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

struct Token {
    std::string text;
    int col; // 1-based start column
};

std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return out;
}

double suffix_scale(const std::string& upper_suffix, bool& ok) {
    ok = true;
    if (upper_suffix.empty()) return 1.0;
    if (upper_suffix.rfind("MEG", 0) == 0) return 1e6;
    switch (upper_suffix[0]) {
        case 'F': return 1e-15;
        case 'P': return 1e-12;
        case 'N': return 1e-9;
        case 'U': return 1e-6;
        case 'M': return 1e-3;
        case 'K': return 1e3;
        case 'G': return 1e9;
        default: ok = false; return 1.0;
    }
}

} // namespace

double parse_value(const std::string& token) {
    size_t pos = 0;
    double base = 0.0;
    try {
        base = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw SimError("not a number: '" + token + "'");
    }
    std::string rest = to_upper(token.substr(pos));
    // Strip trailing unit letters after an engineering suffix (1nF, 2kOhm).
    bool ok = true;
    double scale = suffix_scale(rest, ok);
    if (!ok) throw SimError("bad suffix in '" + token + "'");
    return base * scale;
}

namespace {

double number_at(const std::vector<Token>& toks, size_t idx, int line_no) {
    if (idx >= toks.size())
        throw SyntaxError("missing numeric field", line_no, toks.empty() ? 1 : toks.back().col);
    try {
        return parse_value(toks[idx].text);
    } catch (const SimError& e) {
        throw SyntaxError(e.what(), line_no, toks[idx].col);
    }
}

struct PssKv {
    std::map<std::string, std::string> kv;
};

PssKv parse_kv(const std::vector<Token>& toks, size_t from, int line_no) {
    PssKv out;
    for (size_t i = from; i < toks.size(); ++i) {
        const auto& t = toks[i];
        auto eq = t.text.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("expected KEY=VALUE, got '" + t.text + "'", line_no, t.col);
        out.kv[to_upper(t.text.substr(0, eq))] = t.text.substr(eq + 1);
    }
    return out;
}

void require_finite(const Device& d, const std::string& key, double v) {
    if (!std::isfinite(v))
        throw ValidationError(d.name + ": parameter " + key + " is not finite");
}

} // namespace

void validate_pss_card(const AnalysisCard& card) {
    if (!(card.tper > 0.0))
        throw ValidationError(".PSS: Tper must be > 0");
    if (!(card.tstab >= 10.0 * card.tper))
        throw ValidationError(".PSS: Tstab must satisfy Tstab >= 10*Tper");
    if (card.max_itr < 10)
        throw ValidationError(".PSS: MaxItr must be >= 10");
    if (!(card.eps_max <= 1e-6) || !(card.eps_max > 0.0))
        throw ValidationError(".PSS: EpsMax must satisfy 0 < EpsMax <= 1e-6");
    if (card.steps_per_period < 32)
        throw ValidationError(".PSS: StepsPerPeriod must be >= 32");
}

bool Circuit::has_node(const std::string& name) const {
    if (name == "0") return true;
    return std::find(nodes.begin(), nodes.end(), name) != nodes.end();
}

bool Circuit::has_time_dependent_sources() const {
    return std::any_of(devices.begin(), devices.end(), [](const Device& d) {
        return d.kind == DeviceKind::VSourceSin;
    });
}

const AnalysisCard* Circuit::find_analysis(AnalysisKind kind) const {
    for (const auto& a : analyses)
        if (a.kind == kind) return &a;
    return nullptr;
}

namespace {

void validate(const Circuit& c) {
    // Unique names per prefix class
    std::set<std::string> names;
    for (const auto& d : c.devices)
        if (!names.insert(to_upper(d.name)).second)
            throw ValidationError("duplicate device name " + d.name);

    bool touches_ground = false;
    for (const auto& d : c.devices)
        for (const auto& t : d.terminals)
            if (t == "0") touches_ground = true;
    if (!c.devices.empty() && !touches_ground)
        throw ValidationError("no device terminal references ground node 0");

    for (const auto& d : c.devices) {
        for (const auto& [k, v] : d.params) require_finite(d, k, v);
        switch (d.kind) {
            case DeviceKind::Resistor:
                if (!(d.params.at("R") > 0.0))
                    throw ValidationError(d.name + ": R must be > 0");
                break;
            case DeviceKind::Capacitor:
                if (!(d.params.at("C") > 0.0))
                    throw ValidationError(d.name + ": C must be > 0");
                break;
            case DeviceKind::Inductor:
                if (!(d.params.at("L") > 0.0))
                    throw ValidationError(d.name + ": L must be > 0");
                break;
            case DeviceKind::Diode:
                if (!(d.params.at("IS") > 0.0))
                    throw ValidationError(d.name + ": IS must be > 0");
                if (!(d.params.at("N") >= 1.0))
                    throw ValidationError(d.name + ": N must be >= 1");
                break;
            default:
                break;
        }
    }

    // Connectivity: every node reachable from ground through device terminals.
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& d : c.devices) {
        for (size_t i = 0; i < d.terminals.size(); ++i)
            for (size_t j = 0; j < d.terminals.size(); ++j)
                if (i != j) adj[d.terminals[i]].push_back(d.terminals[j]);
    }
    std::set<std::string> seen;
    std::queue<std::string> work;
    work.push("0");
    seen.insert("0");
    while (!work.empty()) {
        auto cur = work.front();
        work.pop();
        for (const auto& nb : adj[cur])
            if (seen.insert(nb).second) work.push(nb);
    }
    for (const auto& node : c.nodes)
        if (!seen.count(node))
            throw ValidationError("node " + node + " is not reachable from ground");

    for (const auto& a : c.analyses)
        if (a.kind == AnalysisKind::Pss) {
            validate_pss_card(a);
            if (!a.phase_node.empty() && !c.has_node(a.phase_node))
                throw ValidationError(".PSS: unknown phase node " + a.phase_node);
        }
}

} // namespace

Circuit parse_netlist(const std::string& text) {
    Circuit circuit;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;

    auto add_node = [&](const std::string& name) {
        if (name == "0") return;
        if (!circuit.has_node(name)) circuit.nodes.push_back(name);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0].text[0] == '*') continue;

        std::string head = to_upper(toks[0].text);
        if (head[0] == '.') {
            if (head == ".END") break;
            if (head == ".TITLE") {
                auto pos = line.find(toks[0].text) + toks[0].text.size();
                while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
                    ++pos;
                circuit.title = line.substr(pos);
                continue;
            }
            AnalysisCard card;
            card.line = line_no;
            if (head == ".DC") {
                card.kind = AnalysisKind::DC;
            } else if (head == ".TRAN") {
                card.kind = AnalysisKind::Tran;
                card.tstep = number_at(toks, 1, line_no);
                card.tstop = number_at(toks, 2, line_no);
            } else if (head == ".PSS") {
                card.kind = AnalysisKind::Pss;
                auto kv = parse_kv(toks, 1, line_no);
                auto get = [&](const char* key) -> std::optional<std::string> {
                    auto it = kv.kv.find(key);
                    if (it == kv.kv.end()) return std::nullopt;
                    return it->second;
                };
                if (auto v = get("TPER")) card.tper = parse_value(*v);
                if (auto v = get("TSTAB")) card.tstab = parse_value(*v);
                if (auto v = get("MAXITR")) card.max_itr = static_cast<int>(parse_value(*v));
                if (auto v = get("EPSMAX")) card.eps_max = parse_value(*v);
                if (auto v = get("STEPS")) card.steps_per_period = static_cast<int>(parse_value(*v));
                if (auto v = get("PHASENODE")) card.phase_node = *v;
            } else {
                throw SyntaxError("unknown directive " + toks[0].text, line_no, toks[0].col);
            }
            circuit.analyses.push_back(card);
            continue;
        }

        Device dev;
        dev.name = toks[0].text;
        dev.line = line_no;
        if (toks.size() < 3)
            throw SyntaxError("device line needs two terminal nodes", line_no, toks[0].col);
        dev.terminals = {toks[1].text, toks[2].text};

        switch (std::toupper(static_cast<unsigned char>(head[0]))) {
            case 'R':
                dev.kind = DeviceKind::Resistor;
                dev.params["R"] = number_at(toks, 3, line_no);
                break;
            case 'C':
                dev.kind = DeviceKind::Capacitor;
                dev.params["C"] = number_at(toks, 3, line_no);
                break;
            case 'L':
                dev.kind = DeviceKind::Inductor;
                dev.params["L"] = number_at(toks, 3, line_no);
                break;
            case 'V': {
                if (toks.size() < 4)
                    throw SyntaxError("voltage source needs DC or SIN spec", line_no, toks[0].col);
                std::string mode = to_upper(toks[3].text);
                if (mode == "DC") {
                    dev.kind = DeviceKind::VSourceDC;
                    dev.params["DC"] = number_at(toks, 4, line_no);
                } else if (mode == "SIN") {
                    dev.kind = DeviceKind::VSourceSin;
                    dev.params["VO"] = number_at(toks, 4, line_no);
                    dev.params["VA"] = number_at(toks, 5, line_no);
                    dev.params["FREQ"] = number_at(toks, 6, line_no);
                    dev.params["TD"] = toks.size() > 7 ? number_at(toks, 7, line_no) : 0.0;
                } else {
                    throw SyntaxError("expected DC or SIN, got '" + toks[3].text + "'",
                                      line_no, toks[3].col);
                }
                break;
            }
            case 'I': {
                if (toks.size() < 4 || to_upper(toks[3].text) != "DC")
                    throw SyntaxError("current source needs DC spec", line_no, toks[0].col);
                dev.kind = DeviceKind::ISourceDC;
                dev.params["DC"] = number_at(toks, 4, line_no);
                break;
            }
            case 'B': {
                if (toks.size() < 4 || to_upper(toks[3].text) != "POLY")
                    throw SyntaxError("B device needs POLY a0 a1 a2 a3", line_no, toks[0].col);
                dev.kind = DeviceKind::PolyConductance;
                dev.params["A0"] = number_at(toks, 4, line_no);
                dev.params["A1"] = number_at(toks, 5, line_no);
                dev.params["A2"] = number_at(toks, 6, line_no);
                dev.params["A3"] = number_at(toks, 7, line_no);
                break;
            }
            case 'D': {
                dev.kind = DeviceKind::Diode;
                dev.params["IS"] = 1e-14;
                dev.params["N"] = 1.0;
                auto kv = parse_kv(toks, 3, line_no);
                for (const auto& [k, v] : kv.kv) {
                    if (k != "IS" && k != "N")
                        throw SyntaxError("unknown diode parameter " + k, line_no, toks[0].col);
                    dev.params[k] = parse_value(v);
                }
                break;
            }
            default:
                throw SyntaxError("unknown device class '" + dev.name + "'", line_no, toks[0].col);
        }
        add_node(dev.terminals[0]);
        add_node(dev.terminals[1]);
        circuit.devices.push_back(dev);
    }

    validate(circuit);
    return circuit;
}

MnaIndexMap node_index_map(const Circuit& circuit) {
    MnaIndexMap map;
    for (const auto& node : circuit.nodes) {
        map.node_rows[node] = map.n++;
        map.labels.push_back("v(" + node + ")");
    }
    for (const auto& d : circuit.devices) {
        if (d.kind == DeviceKind::Inductor || d.kind == DeviceKind::VSourceDC ||
            d.kind == DeviceKind::VSourceSin) {
            map.branch_rows[d.name] = map.n++;
            map.labels.push_back("i(" + d.name + ")");
        }
    }
    return map;
}

int MnaIndexMap::node_row(const std::string& name) const {
    auto it = node_rows.find(name);
    if (it == node_rows.end()) throw UnknownNodeError("unknown node " + name);
    return it->second;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string print_netlist(const Circuit& circuit) {
    std::ostringstream out;
    if (!circuit.title.empty()) out << ".TITLE " << circuit.title << "\n";
    for (const auto& d : circuit.devices) {
        out << d.name << " " << d.terminals[0] << " " << d.terminals[1];
        switch (d.kind) {
            case DeviceKind::Resistor: out << " " << fmt(d.params.at("R")); break;
            case DeviceKind::Capacitor: out << " " << fmt(d.params.at("C")); break;
            case DeviceKind::Inductor: out << " " << fmt(d.params.at("L")); break;
            case DeviceKind::VSourceDC: out << " DC " << fmt(d.params.at("DC")); break;
            case DeviceKind::VSourceSin:
                out << " SIN " << fmt(d.params.at("VO")) << " " << fmt(d.params.at("VA"))
                    << " " << fmt(d.params.at("FREQ")) << " " << fmt(d.params.at("TD"));
                break;
            case DeviceKind::ISourceDC: out << " DC " << fmt(d.params.at("DC")); break;
            case DeviceKind::PolyConductance:
                out << " POLY " << fmt(d.params.at("A0")) << " " << fmt(d.params.at("A1"))
                    << " " << fmt(d.params.at("A2")) << " " << fmt(d.params.at("A3"));
                break;
            case DeviceKind::Diode:
                out << " IS=" << fmt(d.params.at("IS")) << " N=" << fmt(d.params.at("N"));
                break;
        }
        out << "\n";
    }
    for (const auto& a : circuit.analyses) {
        switch (a.kind) {
            case AnalysisKind::DC: out << ".DC\n"; break;
            case AnalysisKind::Tran:
                out << ".TRAN " << fmt(a.tstep) << " " << fmt(a.tstop) << "\n";
                break;
            case AnalysisKind::Pss:
                out << ".PSS TPER=" << fmt(a.tper) << " TSTAB=" << fmt(a.tstab)
                    << " MAXITR=" << a.max_itr << " EPSMAX=" << fmt(a.eps_max)
                    << " STEPS=" << a.steps_per_period;
                if (!a.phase_node.empty()) out << " PHASENODE=" << a.phase_node;
                out << "\n";
                break;
        }
    }
    out << ".END\n";
    return out.str();
}

bool operator==(const Device& a, const Device& b) {
    return a.kind == b.kind && a.name == b.name && a.terminals == b.terminals &&
           a.params == b.params;
}

bool operator==(const AnalysisCard& a, const AnalysisCard& b) {
    return a.kind == b.kind && a.tper == b.tper && a.tstab == b.tstab &&
           a.max_itr == b.max_itr && a.eps_max == b.eps_max &&
           a.steps_per_period == b.steps_per_period && a.phase_node == b.phase_node &&
           a.tstep == b.tstep && a.tstop == b.tstop;
}

bool operator==(const Circuit& a, const Circuit& b) {
    return a.title == b.title && a.nodes == b.nodes && a.devices == b.devices &&
           a.analyses == b.analyses;
}

} // namespace pss
