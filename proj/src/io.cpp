#include "causal/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace causal {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << content;
}

namespace {

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("JSON parse error: ") + e.what());
    }
}

int get_p(const json& j) {
    if (!j.contains("p") || !j["p"].is_number_integer()) {
        throw std::invalid_argument("field \"p\": expected an integer");
    }
    const int p = j["p"].get<int>();
    if (p < 1) throw std::invalid_argument("field \"p\": must be positive");
    return p;
}

NodeId node_from_json(const json& v, int p, const std::string& where) {
    if (!v.is_number_integer()) {
        throw std::invalid_argument("field " + where + ": expected an integer");
    }
    const int label = v.get<int>();
    if (label < 1 || label > p) {
        throw std::invalid_argument("field " + where + ": node " +
                                    std::to_string(label) +
                                    " outside 1.." + std::to_string(p));
    }
    return label - 1;
}

Dag graph_from_json_obj(const json& j) {
    const int p = get_p(j);
    Dag g(p);
    if (!j.contains("edges") || !j["edges"].is_array()) {
        throw std::invalid_argument("field \"edges\": expected an array");
    }
    int idx = 0;
    for (const auto& e : j["edges"]) {
        const std::string where = "edges[" + std::to_string(idx) + "]";
        if (!e.is_array() || e.size() != 2) {
            throw std::invalid_argument("field " + where +
                                        ": expected a pair [i, j]");
        }
        const NodeId a = node_from_json(e[0], p, where + "[0]");
        const NodeId b = node_from_json(e[1], p, where + "[1]");
        try {
            g.add_edge(a, b);
        } catch (const std::invalid_argument& err) {
            throw std::invalid_argument("field " + where + ": " + err.what());
        }
        ++idx;
    }
    return g;
}

json graph_to_json_obj(const Dag& g) {
    json j;
    j["p"] = g.node_count();
    json edges = json::array();
    for (const auto& [i, k] : g.edges()) {
        edges.push_back(json::array({i + 1, k + 1}));
    }
    j["edges"] = std::move(edges);
    return j;
}

}  // namespace

Dag graph_from_json(const std::string& text) {
    return graph_from_json_obj(parse(text));
}

std::string graph_to_json(const Dag& g) { return graph_to_json_obj(g).dump(); }

TargetFamily family_from_json(const std::string& text) {
    const json j = parse(text);
    const int p = get_p(j);
    if (!j.contains("targets") || !j["targets"].is_array()) {
        throw std::invalid_argument("field \"targets\": expected an array");
    }
    std::vector<std::vector<NodeId>> targets;
    int idx = 0;
    for (const auto& t : j["targets"]) {
        const std::string where = "targets[" + std::to_string(idx) + "]";
        if (!t.is_array()) {
            throw std::invalid_argument("field " + where + ": expected an array");
        }
        std::vector<NodeId> target;
        int k = 0;
        for (const auto& v : t) {
            target.push_back(
                node_from_json(v, p, where + "[" + std::to_string(k) + "]"));
            ++k;
        }
        targets.push_back(std::move(target));
        ++idx;
    }
    try {
        return TargetFamily::of(p, std::move(targets));
    } catch (const std::invalid_argument& err) {
        throw std::invalid_argument(std::string("field \"targets\": ") +
                                    err.what());
    }
}

std::string family_to_json(const TargetFamily& fam) {
    json j;
    j["p"] = fam.p;
    json targets = json::array();
    for (const auto& t : fam.targets) {
        json arr = json::array();
        for (NodeId v : t) arr.push_back(v + 1);
        targets.push_back(std::move(arr));
    }
    j["targets"] = std::move(targets);
    return j.dump();
}

SemModel model_from_json(const std::string& text) {
    const json j = parse(text);
    SemModel m;
    m.g = graph_from_json_obj(j);
    const int p = m.g.node_count();
    if (!j.contains("weights") || !j["weights"].is_array()) {
        throw std::invalid_argument("field \"weights\": expected an array");
    }
    int idx = 0;
    for (const auto& w : j["weights"]) {
        const std::string where = "weights[" + std::to_string(idx) + "]";
        if (!w.is_array() || w.size() != 3) {
            throw std::invalid_argument("field " + where +
                                        ": expected [i, j, w]");
        }
        const NodeId a = node_from_json(w[0], p, where + "[0]");
        const NodeId b = node_from_json(w[1], p, where + "[1]");
        if (!w[2].is_number()) {
            throw std::invalid_argument("field " + where +
                                        "[2]: expected a number");
        }
        if (!m.g.has_edge(a, b)) {
            throw std::invalid_argument("field " + where +
                                        ": weight for a non-edge");
        }
        m.weights[{a, b}] = w[2].get<double>();
        ++idx;
    }
    if (!j.contains("noise_var") || !j["noise_var"].is_array() ||
        static_cast<int>(j["noise_var"].size()) != p) {
        throw std::invalid_argument(
            "field \"noise_var\": expected an array of length p");
    }
    m.noise_var.clear();
    for (const auto& v : j["noise_var"]) {
        if (!v.is_number()) {
            throw std::invalid_argument("field \"noise_var\": expected numbers");
        }
        m.noise_var.push_back(v.get<double>());
    }
    m.validate();
    return m;
}

std::string model_to_json(const SemModel& m) {
    json j = graph_to_json_obj(m.g);
    json weights = json::array();
    for (const auto& [e, w] : m.weights) {
        weights.push_back(json::array({e.first + 1, e.second + 1, w}));
    }
    j["weights"] = std::move(weights);
    j["noise_var"] = m.noise_var;
    return j.dump();
}

namespace {

std::string target_label(const std::vector<NodeId>& target) {
    if (target.empty()) return "obs";
    std::string s;
    for (std::size_t k = 0; k < target.size(); ++k) {
        if (k > 0) s += ';';
        s += std::to_string(target[k] + 1);
    }
    return s;
}

}  // namespace

void write_dataset_csv(std::ostream& out, const MultiDataset& data) {
    const int p = data.p();
    out << "block,target";
    for (int c = 0; c < p; ++c) out << ",X" << (c + 1);
    out << "\n";
    for (int b = 0; b < data.block_count(); ++b) {
        const auto label = target_label(data.fam.targets[b]);
        const ColMatrix& block = data.blocks[b];
        for (std::size_t r = 0; r < block.rows; ++r) {
            out << b << ',' << label;
            for (int c = 0; c < p; ++c) {
                out << ',' << format_double(block.at(r, c));
            }
            out << "\n";
        }
    }
}

MultiDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("dataset CSV: empty input");
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    if (header.size() < 3 || header[0] != "block" || header[1] != "target") {
        throw std::invalid_argument(
            "dataset CSV: header must be block,target,X1,...");
    }
    const int p = static_cast<int>(header.size()) - 2;

    std::vector<std::vector<double>> rows_by_block_data;
    std::vector<std::string> label_by_block;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (static_cast<int>(fields.size()) != p + 2) {
            throw std::invalid_argument("dataset CSV line " +
                                        std::to_string(line_no) +
                                        ": wrong field count");
        }
        const int b = std::stoi(fields[0]);
        if (b < 0) {
            throw std::invalid_argument("dataset CSV line " +
                                        std::to_string(line_no) +
                                        ": negative block index");
        }
        if (b >= static_cast<int>(rows_by_block_data.size())) {
            rows_by_block_data.resize(b + 1);
            label_by_block.resize(b + 1);
        }
        if (label_by_block[b].empty()) {
            label_by_block[b] = fields[1];
        } else if (label_by_block[b] != fields[1]) {
            throw std::invalid_argument("dataset CSV line " +
                                        std::to_string(line_no) +
                                        ": target label differs within block");
        }
        for (int c = 0; c < p; ++c) {
            rows_by_block_data[b].push_back(std::stod(fields[c + 2]));
        }
    }

    MultiDataset data;
    std::vector<std::vector<NodeId>> targets;
    for (std::size_t b = 0; b < rows_by_block_data.size(); ++b) {
        if (rows_by_block_data[b].empty()) {
            throw std::invalid_argument("dataset CSV: block " +
                                        std::to_string(b) + " has no rows");
        }
        std::vector<NodeId> target;
        if (label_by_block[b] != "obs") {
            std::stringstream ss(label_by_block[b]);
            std::string tok;
            while (std::getline(ss, tok, ';')) {
                const int label = std::stoi(tok);
                if (label < 1 || label > p) {
                    throw std::invalid_argument("dataset CSV: target node " +
                                                tok + " outside 1.." +
                                                std::to_string(p));
                }
                target.push_back(label - 1);
            }
        }
        targets.push_back(std::move(target));

        const std::size_t n = rows_by_block_data[b].size() / p;
        ColMatrix block(n, p);
        // rows were appended row-major
        for (std::size_t r = 0; r < n; ++r) {
            for (int c = 0; c < p; ++c) {
                block.at(r, c) = rows_by_block_data[b][r * p + c];
            }
        }
        data.blocks.push_back(std::move(block));
        data.success.emplace_back(n, 1);
    }
    data.fam = TargetFamily::of(p, std::move(targets));
    return data;
}

std::string learn_report_to_json(const LearnReport& report) {
    json j;
    const SearchResult& res = report.result;
    j["dag"] = json::parse(graph_to_json(res.g));
    json perm = json::array();
    for (NodeId v : res.pi.order) perm.push_back(v + 1);
    j["permutation"] = std::move(perm);
    j["edge_count"] = res.g.edge_count();
    j["i_contradictory_count"] = res.i_contradictory_count;

    json trace;
    trace["truncated"] = res.trace.truncated;
    json entries = json::array();
    for (const TraceEntry& e : res.trace.entries) {
        json je;
        json perm_e = json::array();
        for (NodeId v : e.perm) perm_e.push_back(v + 1);
        je["perm"] = std::move(perm_e);
        je["imap_edges"] = e.imap_edges;
        if (e.move) {
            json host = json::array();
            for (NodeId v : e.host_perm) host.push_back(v + 1);
            je["host_perm"] = std::move(host);
            je["move"] = json::array({e.move->first + 1, e.move->second + 1});
            je["move_class"] = e.move_class == MoveClass::i_contradictory
                                   ? "i-contradictory"
                                   : "plain-i-covered";
            je["i_covered"] = e.i_covered;
        }
        je["restart"] = e.restart;
        je["i_contradictory_count"] = e.i_contradictory_count;
        entries.push_back(std::move(je));
    }
    trace["entries"] = std::move(entries);
    j["trace"] = std::move(trace);

    json tests;
    tests["ci_queries"] = report.ci_queries;
    tests["ci_evaluated"] = report.ci_evaluated;
    tests["inv_queries"] = report.inv_queries;
    tests["inv_evaluated"] = report.inv_evaluated;
    j["tests"] = std::move(tests);
    return j.dump(2) + "\n";
}

}  // namespace causal
