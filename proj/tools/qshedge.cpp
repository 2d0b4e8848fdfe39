// qshedge: superreplication pricing on finite event trees under a family of
// martingale models. Subcommands: check, price, gen, verify.

#include "qshedge/generators.hpp"
#include "qshedge/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <set>
#include <string>

namespace {

using namespace qshedge;

int run_check(const std::string& path) {
    InstanceFile file = load_instance_path(path);
    const EventTree& tree = file.tree;
    std::cout << "tree: " << tree.size() << " nodes, horizon " << tree.horizon() << ", "
              << tree.leaves().size() << " leaves\n";

    bool ok = true;
    if (file.models.empty()) {
        std::cout << "models: none (family must be nonempty)\n";
        ok = false;
    }
    for (const Model& m : file.models) {
        try {
            check_model(tree, m);
        } catch (const Error& e) {
            std::cout << "model '" << m.name << "': " << e.what() << "\n";
            ok = false;
            continue;
        }
        MartingaleReport r = is_martingale_measure(tree, m);
        if (r.ok) {
            double worst = 0.0;
            for (const auto& nr : r.residuals) worst = std::max(worst, nr.residual);
            std::cout << "model '" << m.name << "': martingale OK (max residual " << worst << ")\n";
        } else {
            std::cout << "model '" << m.name << "': NOT a martingale measure\n";
            for (const auto& nr : r.residuals)
                if (!nr.ok)
                    std::cout << "  node " << nr.node << ": residual " << nr.residual << " > bound " << nr.bound
                              << " (mass " << nr.mass << ")\n";
            ok = false;
        }
    }
    try {
        check_claim(tree, file.claim);
        std::cout << "claim: OK on " << file.claim.payoffs.size() << " leaves\n";
    } catch (const Error& e) {
        std::cout << "claim: " << e.what() << "\n";
        ok = false;
    }
    if (!file.models.empty()) {
        PolarReport polar = polar_set(tree, ModelFamily{file.models});
        std::cout << "polar set:";
        if (polar.polar_leaves.empty()) {
            std::cout << " (empty)";
        } else {
            for (NodeId id : polar.polar_leaves) std::cout << " " << id;
        }
        std::cout << "\nqs support: " << polar.qs_support.size() << " of " << tree.leaves().size()
                  << " leaves\n";
    }
    std::cout << (ok ? "check: PASS\n" : "check: FAIL\n");
    return ok ? 0 : 1;
}

int run_price(const std::string& path, bool exact, double tol) {
    InstanceFile file = load_instance_path(path);
    Instance instance = make_instance(file);
    if (exact) {
        ExactDuality report = exact_duality(instance, file.exact);
        std::cout << exact_report_to_json(report);
    } else {
        DualityReport report = duality_report(instance, tol);
        std::cout << report_to_json(report);
    }
    return 0;
}

// Tree-plus-forbidden-leaves document for `gen --nullset`:
// {"horizon": T, "nodes": [...], "forbidden": [leaf ids]}
std::pair<EventTree, std::set<NodeId>> load_nullset_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::ParseError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw Error(Errc::ParseError, e.what());
    }
    if (!doc.is_object()) throw Error(Errc::ParseError, "nullset spec must be an object");
    iodetail::reject_unknown_keys(doc, {"horizon", "nodes", "forbidden"}, "nullset spec");
    for (const char* k : {"horizon", "nodes", "forbidden"})
        if (!doc.contains(k)) throw Error(Errc::ParseError, std::string("nullset spec missing '") + k + "'");
    if (!doc["horizon"].is_number_integer() || !doc["nodes"].is_array() || !doc["forbidden"].is_array())
        throw Error(Errc::ParseError, "nullset spec: horizon int, nodes array, forbidden array");

    std::vector<RawNode> nodes;
    for (const Json& jn : doc["nodes"]) {
        if (!jn.is_object()) throw Error(Errc::ParseError, "nodes entries must be objects");
        iodetail::reject_unknown_keys(jn, {"id", "time", "parent", "price"}, "nodes");
        RawNode n;
        n.id = jn.at("id").get<NodeId>();
        n.time = jn.at("time").get<int>();
        if (jn.at("parent").is_null())
            n.parent = std::nullopt;
        else
            n.parent = jn.at("parent").get<NodeId>();
        n.price = iodetail::double_value(jn.at("price"), "nodes.price");
        nodes.push_back(n);
    }
    std::set<NodeId> forbidden;
    for (const Json& j : doc["forbidden"]) {
        if (!j.is_number_integer()) throw Error(Errc::ParseError, "forbidden entries must be integer leaf ids");
        forbidden.insert(j.get<NodeId>());
    }
    return {EventTree::validate(doc["horizon"].get<int>(), nodes), forbidden};
}

int run_verify(const std::string& path, const std::string& plan_path, double tol) {
    InstanceFile file = load_instance_path(path);
    Instance instance = make_instance(file);
    HedgePlan plan = load_plan_path(plan_path);
    VerifyResult res = verify_superhedge(instance, plan, tol);
    if (res.ok) {
        std::cout << "verify: PASS (tightest leaf " << res.worst_leaf << ", slack " << -res.shortfall << ")\n";
        return 0;
    }
    std::cout << "verify: FAIL at leaf " << res.worst_leaf << ", shortfall " << res.shortfall << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superreplication pricing on finite event trees under model families"};
    app.require_subcommand(1);

    std::string path, plan_path, nullset_path;
    double tol = 1e-8;
    bool exact = false;
    double lo = 0.0, hi = 0.0;
    int horizon = 1, branching = 2, model_count = 1;
    std::uint64_t seed = 0;

    CLI::App* check = app.add_subcommand("check", "Validate an instance file and report residuals");
    check->add_option("path", path, "instance JSON file")->required();

    CLI::App* price = app.add_subcommand("price", "Compute primal/dual prices, strategy and dual measure");
    price->add_option("path", path, "instance JSON file")->required();
    price->add_flag("--exact", exact, "solve in exact rational arithmetic, print fractions");
    price->add_option("--tol", tol, "LP tolerance (default 1e-8)");

    CLI::App* gen = app.add_subcommand("gen", "Generate an instance and print it to stdout");
    CLI::Option* opt_interval =
        gen->add_option("--interval", [&lo, &hi](const CLI::results_t& r) {
               lo = std::stod(r.at(0));
               hi = std::stod(r.at(1));
               return true;
           },
           "price-ratio interval LO HI (must contain 1 strictly inside)")
            ->expected(2);
    CLI::Option* opt_nullset =
        gen->add_option("--nullset", nullset_path, "JSON file with {horizon, nodes, forbidden}");
    opt_interval->excludes(opt_nullset);
    opt_nullset->excludes(opt_interval);
    gen->add_option("--T", horizon, "number of periods (interval mode)");
    gen->add_option("--branching", branching, "children per node (interval mode)");
    gen->add_option("--models", model_count, "number of sampled models");
    gen->add_option("--seed", seed, "generator seed");

    CLI::App* verify = app.add_subcommand("verify", "Check a plan file against an instance");
    verify->add_option("path", path, "instance JSON file")->required();
    verify->add_option("--plan", plan_path, "plan JSON file {price, strategy}")->required();
    verify->add_option("--tol", tol, "verification tolerance (default 1e-8)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (check->parsed()) return run_check(path);
        if (price->parsed()) return run_price(path, exact, tol);
        if (verify->parsed()) return run_verify(path, plan_path, tol);
        if (gen->parsed()) {
            qshedge::Instance instance = [&]() {
                if (opt_nullset->count() > 0) {
                    auto [tree, forbidden] = load_nullset_spec(nullset_path);
                    return qshedge::gen_nullset_instance(tree, forbidden, model_count, seed);
                }
                if (opt_interval->count() == 0)
                    throw qshedge::Error(qshedge::Errc::ParseError, "gen needs --interval or --nullset");
                return qshedge::gen_interval_instance(horizon, lo, hi, branching, model_count, seed);
            }();
            std::cout << qshedge::instance_to_json(instance);
            return 0;
        }
    } catch (const qshedge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qshedge::is_validation_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
