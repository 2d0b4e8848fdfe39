#pragma once

#include "qshedge/hedge.hpp"
#include "qshedge/oracle.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace qshedge {

using Json = nlohmann::json;

namespace iodetail {

// Records the unparsed text of every number in a JSON document, keyed by
// JSON pointer. The DOM alone cannot serve the exact path: it stores numbers
// as binary doubles, while the oracle wants digits over a power of ten.
class RawNumberRecorder : public Json::json_sax_t {
public:
    std::map<std::string, std::string> raw;

    bool null() override { return on_value(); }
    bool boolean(bool) override { return on_value(); }
    bool number_integer(number_integer_t v) override {
        raw[path()] = std::to_string(v);
        return on_value();
    }
    bool number_unsigned(number_unsigned_t v) override {
        raw[path()] = std::to_string(v);
        return on_value();
    }
    bool number_float(number_float_t, const string_t& s) override {
        raw[path()] = s;
        return on_value();
    }
    bool string(string_t&) override { return on_value(); }
    bool binary(binary_t&) override { return on_value(); }
    bool start_object(std::size_t) override {
        on_value();
        frames_.push_back({false, 0, ""});
        return true;
    }
    bool key(string_t& k) override {
        frames_.back().key = k;
        return true;
    }
    bool end_object() override {
        frames_.pop_back();
        return true;
    }
    bool start_array(std::size_t) override {
        on_value();
        frames_.push_back({true, 0, ""});
        return true;
    }
    bool end_array() override {
        frames_.pop_back();
        return true;
    }
    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) override {
        throw Error(Errc::ParseError, std::string(ex.what()) + " at byte " + std::to_string(position));
    }

private:
    struct Frame {
        bool is_array;
        std::size_t index;
        std::string key;
    };
    std::vector<Frame> frames_;

    static std::string escape(const std::string& k) {
        std::string out;
        for (char c : k) {
            if (c == '~')
                out += "~0";
            else if (c == '/')
                out += "~1";
            else
                out += c;
        }
        return out;
    }

    std::string path() const {
        std::string p;
        for (const Frame& f : frames_)
            p += "/" + (f.is_array ? std::to_string(f.index) : escape(f.key));
        return p;
    }

    bool on_value() {
        if (!frames_.empty() && frames_.back().is_array) ++frames_.back().index;
        return true;
    }
};

inline void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw Error(Errc::ParseError, "unknown key '" + it.key() + "' in " + where);
    }
}

inline NodeId parse_id_key(const std::string& key, const std::string& where) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
        return static_cast<NodeId>(v);
    } catch (const std::exception&) {
        throw Error(Errc::ParseError, "key '" + key + "' in " + where + " is not an integer id");
    }
}

// A numeric field is either a JSON number (decimal text recorded by the SAX
// pass) or a string holding a decimal or a fraction "p/q".
inline Rational exact_value(const Json& v, const std::map<std::string, std::string>& raw,
                            const std::string& pointer, const std::string& where) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number()) return parse_decimal(raw.at(pointer));
    throw Error(Errc::ParseError, where + " must be a number or a numeric string");
}

inline double double_value(const Json& v, const std::string& where) {
    if (v.is_string()) return to_double(parse_rational(v.get<std::string>()));
    if (v.is_number()) return v.get<double>();
    throw Error(Errc::ParseError, where + " must be a number or a numeric string");
}

} // namespace iodetail

/// An instance file pulled apart: structurally valid tree plus the parsed
/// models and claim (not yet checked against the martingale/shape
/// invariants, so validators can report on bad files), with the
/// decimal-exact payload alongside.
struct InstanceFile {
    EventTree tree;
    std::vector<Model> models;
    Claim claim;
    ExactInstance exact;
};

/// Parses and structurally validates an instance document. Field names are
/// fixed: horizon, nodes[{id,time,parent,price}], models[{name,weights}],
/// claim. Unknown keys are rejected. Prices, weights and payoffs may be
/// numbers or numeric strings ("0.25", "1/3").
inline InstanceFile load_instance_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    iodetail::RawNumberRecorder recorder;
    Json::sax_parse(text, &recorder);
    const auto& raw = recorder.raw;

    if (!doc.is_object()) throw Error(Errc::ParseError, "top level must be an object");
    iodetail::reject_unknown_keys(doc, {"horizon", "nodes", "models", "claim"}, "instance");
    for (const char* k : {"horizon", "nodes", "models", "claim"})
        if (!doc.contains(k)) throw Error(Errc::ParseError, std::string("missing key '") + k + "'");
    if (!doc["horizon"].is_number_integer()) throw Error(Errc::ParseError, "horizon must be an integer");
    if (!doc["nodes"].is_array()) throw Error(Errc::ParseError, "nodes must be an array");
    if (!doc["models"].is_array()) throw Error(Errc::ParseError, "models must be an array");
    if (!doc["claim"].is_object()) throw Error(Errc::ParseError, "claim must be an object");

    const int horizon = doc["horizon"].get<int>();

    std::vector<RawNode> nodes;
    std::map<NodeId, Rational> exact_prices;
    std::size_t idx = 0;
    for (const Json& jn : doc["nodes"]) {
        const std::string where = "nodes[" + std::to_string(idx) + "]";
        if (!jn.is_object()) throw Error(Errc::ParseError, where + " must be an object");
        iodetail::reject_unknown_keys(jn, {"id", "time", "parent", "price"}, where);
        for (const char* k : {"id", "time", "parent", "price"})
            if (!jn.contains(k)) throw Error(Errc::ParseError, where + " missing key '" + k + "'");
        if (!jn["id"].is_number_integer() || !jn["time"].is_number_integer())
            throw Error(Errc::ParseError, where + ": id and time must be integers");
        RawNode n;
        n.id = jn["id"].get<NodeId>();
        n.time = jn["time"].get<int>();
        if (jn["parent"].is_null())
            n.parent = std::nullopt;
        else if (jn["parent"].is_number_integer())
            n.parent = jn["parent"].get<NodeId>();
        else
            throw Error(Errc::ParseError, where + ": parent must be an integer or null");
        // prices are scalar by contract; anything else does not parse
        n.price = iodetail::double_value(jn["price"], where + ".price");
        exact_prices[n.id] =
            iodetail::exact_value(jn["price"], raw, "/nodes/" + std::to_string(idx) + "/price", where + ".price");
        nodes.push_back(n);
        ++idx;
    }
    file.tree = EventTree::validate(horizon, nodes);
    file.exact.prices = std::move(exact_prices);

    std::size_t midx = 0;
    for (const Json& jm : doc["models"]) {
        const std::string where = "models[" + std::to_string(midx) + "]";
        if (!jm.is_object()) throw Error(Errc::ParseError, where + " must be an object");
        iodetail::reject_unknown_keys(jm, {"name", "weights"}, where);
        if (!jm.contains("name") || !jm["name"].is_string())
            throw Error(Errc::ParseError, where + " needs a string 'name'");
        if (!jm.contains("weights") || !jm["weights"].is_object())
            throw Error(Errc::ParseError, where + " needs an object 'weights'");
        Model model;
        model.name = jm["name"].get<std::string>();
        std::map<NodeId, Rational> exact_w;
        for (auto it = jm["weights"].begin(); it != jm["weights"].end(); ++it) {
            const NodeId leaf = iodetail::parse_id_key(it.key(), where + ".weights");
            model.leaf_weights[leaf] = iodetail::double_value(it.value(), where + ".weights");
            exact_w[leaf] = iodetail::exact_value(it.value(), raw,
                                                  "/models/" + std::to_string(midx) + "/weights/" + it.key(),
                                                  where + ".weights");
        }
        file.models.push_back(std::move(model));
        file.exact.weights.push_back(std::move(exact_w));
        ++midx;
    }

    for (auto it = doc["claim"].begin(); it != doc["claim"].end(); ++it) {
        const NodeId leaf = iodetail::parse_id_key(it.key(), "claim");
        file.claim.payoffs[leaf] = iodetail::double_value(it.value(), "claim");
        file.exact.claim[leaf] = iodetail::exact_value(it.value(), raw, "/claim/" + it.key(), "claim");
    }
    return file;
}

inline InstanceFile load_instance_path(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::ParseError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_instance_text(buf.str());
}

/// Applies the full instance invariants to a parsed file.
inline Instance make_instance(const InstanceFile& file, double mart_tol = kMartingaleTol) {
    return Instance::make(file.tree, ModelFamily{file.models}, file.claim, mart_tol);
}

/// Serializes an instance to the schema accepted by load_instance_text.
/// Output is deterministic: objects are key-sorted and doubles print in
/// shortest round-trip form.
inline std::string instance_to_json(const Instance& instance) {
    Json doc;
    doc["horizon"] = instance.tree.horizon();
    Json nodes = Json::array();
    for (int t = 0; t <= instance.tree.horizon(); ++t) {
        for (NodeId id : instance.tree.nodes_at(t)) {
            Json n;
            n["id"] = id;
            n["time"] = t;
            auto p = instance.tree.parent(id);
            if (p)
                n["parent"] = *p;
            else
                n["parent"] = nullptr;
            n["price"] = instance.tree.price(id);
            nodes.push_back(std::move(n));
        }
    }
    doc["nodes"] = std::move(nodes);
    Json models = Json::array();
    for (const Model& m : instance.family.models) {
        Json jm;
        jm["name"] = m.name;
        Json w = Json::object();
        for (const auto& [leaf, v] : m.leaf_weights) w[std::to_string(leaf)] = v;
        jm["weights"] = std::move(w);
        models.push_back(std::move(jm));
    }
    doc["models"] = std::move(models);
    Json claim = Json::object();
    for (const auto& [leaf, v] : instance.claim.payoffs) claim[std::to_string(leaf)] = v;
    doc["claim"] = std::move(claim);
    return doc.dump(2) + "\n";
}

/// Plan document: {"price": value, "strategy": {node-id: value}}.
inline HedgePlan load_plan_text(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    if (!doc.is_object()) throw Error(Errc::ParseError, "plan must be an object");
    iodetail::reject_unknown_keys(doc, {"price", "strategy"}, "plan");
    if (!doc.contains("price") || !doc.contains("strategy") || !doc["strategy"].is_object())
        throw Error(Errc::ParseError, "plan needs 'price' and object 'strategy'");
    HedgePlan plan;
    plan.price = iodetail::double_value(doc["price"], "plan.price");
    for (auto it = doc["strategy"].begin(); it != doc["strategy"].end(); ++it)
        plan.strategy.values[iodetail::parse_id_key(it.key(), "plan.strategy")] =
            iodetail::double_value(it.value(), "plan.strategy");
    return plan;
}

inline HedgePlan load_plan_path(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::ParseError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_plan_text(buf.str());
}

inline std::string plan_to_json(const HedgePlan& plan) {
    Json doc;
    doc["price"] = plan.price;
    Json strat = Json::object();
    for (const auto& [node, h] : plan.strategy.values) strat[std::to_string(node)] = h;
    doc["strategy"] = std::move(strat);
    return doc.dump(2) + "\n";
}

/// Price report as emitted by the CLI.
inline std::string report_to_json(const DualityReport& report) {
    Json doc;
    doc["primal"] = report.primal_price;
    doc["dual"] = report.dual_price;
    doc["model_sup"] = report.model_sup;
    doc["gap"] = report.gap;
    doc["argmax_model"] = report.argmax_model;
    Json strat = Json::object();
    for (const auto& [node, h] : report.optimal_strategy.values) strat[std::to_string(node)] = h;
    doc["strategy"] = std::move(strat);
    Json q = Json::object();
    for (const auto& [leaf, v] : report.optimal_dual_measure) q[std::to_string(leaf)] = v;
    doc["dual_measure"] = std::move(q);
    return doc.dump(2) + "\n";
}

/// Exact price report: every value rendered as an exact fraction string.
inline std::string exact_report_to_json(const ExactDuality& report) {
    Json doc;
    doc["primal"] = fraction_string(report.primal_price);
    doc["dual"] = fraction_string(report.dual_price);
    doc["model_sup"] = fraction_string(report.model_sup);
    doc["gap"] = fraction_string(report.gap);
    doc["argmax_model"] = report.argmax_model;
    Json strat = Json::object();
    for (const auto& [node, h] : report.strategy) strat[std::to_string(node)] = fraction_string(h);
    doc["strategy"] = std::move(strat);
    Json q = Json::object();
    for (const auto& [leaf, v] : report.dual_measure) q[std::to_string(leaf)] = fraction_string(v);
    doc["dual_measure"] = std::move(q);
    return doc.dump(2) + "\n";
}

} // namespace qshedge
