#include "sigmak/cli.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "sigmak/barriers.hpp"
#include "sigmak/bubbles.hpp"
#include "sigmak/comparison.hpp"
#include "sigmak/cones.hpp"
#include "sigmak/conformal.hpp"
#include "sigmak/errors.hpp"
#include "sigmak/jet.hpp"
#include "sigmak/parallel.hpp"
#include "sigmak/solver.hpp"

namespace sigmak::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CommandInfo {
    Command command;
    const char* name;
    bool uses_cones;
    bool uses_dims;
    int min_dim;
    int max_dim;
};

const std::vector<CommandInfo>& command_table() {
    static const std::vector<CommandInfo> table{
        {Command::ConesMuPlus, "cones mu-plus", true, true, 2, 40},
        {Command::VerifyBubble, "verify bubble", true, true, 3, kMaxJetDim},
        {Command::VerifyBarrierSub, "verify barrier-sub", true, true, 3, kMaxJetDim},
        {Command::VerifyBarrierSuper, "verify barrier-super", true, true, 3, kMaxJetDim},
        {Command::VerifyGershgorin, "verify gershgorin", false, true, 2, 40},
        {Command::VerifySupH, "verify suph", false, true, 3, kMaxJetDim},
        {Command::CompareHawking, "compare hawking", false, false, 0, 0},
        {Command::CompareBishopGromov, "compare bishop-gromov", false, true, 2, 40},
        {Command::SolveRadial, "solve radial", true, true, 3, 12},
        {Command::SolveHomotopy, "solve homotopy", true, true, 3, 12},
    };
    return table;
}

const CommandInfo& info(Command c) {
    for (const auto& e : command_table())
        if (e.command == c) return e;
    throw std::logic_error("unknown command");
}

enum class Kind { Flag, Number, Integer, Text, NumberList };

struct ParamSpec {
    Kind kind;
    bool positive = false;
    std::vector<std::string> choices{};
};

using Schema = std::map<std::string, ParamSpec>;

const Schema& schema_for(Command c) {
    static const std::map<Command, Schema> schemas{
        {Command::ConesMuPlus, {{"tolerance", {Kind::Number, true}}}},
        {Command::VerifyBubble,
         {{"instances", {Kind::Integer, true}},
          {"samples", {Kind::Integer, true}},
          {"mode", {Kind::Text, false, {"analytic", "fd"}}},
          {"fd_step", {Kind::Number, true}},
          {"tolerance", {Kind::Number, true}},
          {"spread", {Kind::Number, true}}}},
        {Command::VerifyBarrierSub,
         {{"deltas", {Kind::NumberList, true}},
          {"r_min", {Kind::Number, true}},
          {"r1_start", {Kind::Number, true}},
          {"r1_floor", {Kind::Number, true}},
          {"r_nodes", {Kind::Integer, true}},
          {"directions", {Kind::Integer, true}},
          {"background", {Kind::Text, false, {"flat", "sphere"}}},
          {"check_precondition", {Kind::Flag}}}},
        {Command::VerifyBarrierSuper,
         {{"deltas", {Kind::NumberList, true}},
          {"mus", {Kind::NumberList, true}},
          {"epsilons", {Kind::NumberList, true}},
          {"r_min", {Kind::Number, true}},
          {"r1_start", {Kind::Number, true}},
          {"r1_floor", {Kind::Number, true}},
          {"r_nodes", {Kind::Integer, true}},
          {"directions", {Kind::Integer, true}},
          {"background", {Kind::Text, false, {"flat", "sphere"}}}}},
        {Command::VerifyGershgorin, {{"pairs", {Kind::Integer, true}}, {"scale", {Kind::Number, true}}}},
        {Command::VerifySupH,
         {{"K", {Kind::Number, true}},
          {"delta", {Kind::Number, true}},
          {"background", {Kind::Text, false, {"flat", "sphere"}}},
          {"nodes", {Kind::Integer, true}},
          {"directions", {Kind::Integer, true}}}},
        {Command::CompareHawking,
         {{"alphas", {Kind::NumberList}},
          {"c0", {Kind::NumberList, true}},
          {"radii", {Kind::NumberList, true}},
          {"tolerance", {Kind::Number, true}}}},
        {Command::CompareBishopGromov,
         {{"alpha", {Kind::Number}},
          {"background", {Kind::Text, false, {"sphere", "flat", "hyperbolic"}}},
          {"background_alpha", {Kind::Number, true}},
          {"r_min", {Kind::Number, true}},
          {"r_max", {Kind::Number, true}},
          {"nodes", {Kind::Integer, true}},
          {"limit_tolerance", {Kind::Number, true}}}},
        {Command::SolveRadial,
         {{"nodes", {Kind::Integer, true}},
          {"discretization", {Kind::Text, false, {"chebyshev", "fd"}}},
          {"steps", {Kind::Integer, true}},
          {"perturbation", {Kind::Number}},
          {"tolerance", {Kind::Number, true}},
          {"check_tolerance", {Kind::Number, true}}}},
        {Command::SolveHomotopy,
         {{"nodes", {Kind::Integer, true}},
          {"discretization", {Kind::Text, false, {"chebyshev", "fd"}}},
          {"steps", {Kind::Integer, true}},
          {"tolerance", {Kind::Number, true}},
          {"check_tolerance", {Kind::Number, true}}}},
    };
    return schemas.at(c);
}

// ------------------------------------------------------------------ parsing

class Parser {
public:
    explicit Parser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& what) const {
        const auto m = at.Mark();
        if (m.is_null()) throw ConfigError(fmt::format("{}: {}: {}", source_, field, what));
        throw ConfigError(fmt::format("{}:{}:{}: {}: {}", source_, m.line + 1, m.column + 1, field, what));
    }

    template <class T>
    T scalar(const YAML::Node& node, const std::string& field, const char* expected) const {
        if (!node.IsScalar()) fail(node, field, fmt::format("expected {}", expected));
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, field, fmt::format("expected {}, got '{}'", expected, node.Scalar()));
        }
    }

    int integer(const YAML::Node& node, const std::string& field) const {
        return scalar<int>(node, field, "an integer");
    }

    double number(const YAML::Node& node, const std::string& field) const {
        const double v = scalar<double>(node, field, "a number");
        if (!std::isfinite(v)) fail(node, field, "expected a finite number");
        return v;
    }

    void check_keys(const YAML::Node& map, const std::string& field, const std::set<std::string>& allowed) const {
        if (!map.IsMap()) fail(map, field, "expected a mapping");
        for (const auto& kv : map) {
            const auto key = kv.first.Scalar();
            if (!allowed.contains(key))
                fail(kv.first, field.empty() ? key : field + "." + key, "unknown field");
        }
    }

    CampaignConfig config(const YAML::Node& root) const {
        if (!root.IsDefined() || root.IsNull()) fail(root, "<root>", "empty configuration");
        check_keys(root, "", {"schema_version", "out", "seed", "jobs", "campaigns"});
        CampaignConfig cfg;
        if (const auto v = root["schema_version"]) {
            cfg.schema_version = integer(v, "schema_version");
            if (cfg.schema_version != kSchemaVersion)
                fail(v, "schema_version", fmt::format("unsupported version {} (expected {})", cfg.schema_version,
                                                      kSchemaVersion));
        }
        if (const auto v = root["out"]) cfg.out = scalar<std::string>(v, "out", "a path");
        if (const auto v = root["seed"]) cfg.seed = scalar<std::uint64_t>(v, "seed", "an unsigned 64-bit integer");
        if (const auto v = root["jobs"]) {
            cfg.jobs = integer(v, "jobs");
            if (cfg.jobs < 1) fail(v, "jobs", "must be at least 1");
        }
        const auto list = root["campaigns"];
        if (!list) fail(root, "campaigns", "missing required field");
        if (!list.IsSequence() || list.size() == 0) fail(list, "campaigns", "expected a non-empty list");
        std::set<std::string> ids;
        for (std::size_t i = 0; i < list.size(); ++i) {
            auto c = campaign(list[i], fmt::format("campaigns[{}]", i));
            if (!ids.insert(c.id).second) fail(list[i]["id"], fmt::format("campaigns[{}].id", i), "duplicate id");
            cfg.campaigns.push_back(std::move(c));
        }
        return cfg;
    }

private:
    Campaign campaign(const YAML::Node& node, const std::string& field) const {
        check_keys(node, field, {"id", "command", "dims", "cones", "pairs", "expect", "params"});
        Campaign c;
        const auto id = node["id"];
        if (!id) fail(node, field + ".id", "missing required field");
        c.id = scalar<std::string>(id, field + ".id", "a string");
        if (c.id.empty() || !std::all_of(c.id.begin(), c.id.end(), [](unsigned char ch) {
                return std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.';
            }))
            fail(id, field + ".id", "must be non-empty and use only letters, digits, '-', '_' or '.'");
        const auto cmd = node["command"];
        if (!cmd) fail(node, field + ".command", "missing required field");
        try {
            c.command = command_from_string(scalar<std::string>(cmd, field + ".command", "a string"));
        } catch (const ConfigError& e) {
            fail(cmd, field + ".command", e.what());
        }
        if (const auto e = node["expect"]) {
            const auto s = scalar<std::string>(e, field + ".expect", "'pass' or 'fail'");
            if (s != "pass" && s != "fail") fail(e, field + ".expect", "expected 'pass' or 'fail'");
            c.expect_pass = s == "pass";
        }
        c.items = items(node, field, info(c.command));
        if (const auto p = node["params"]) c.params = params(p, field + ".params", c.command);
        return c;
    }

    std::vector<Item> items(const YAML::Node& node, const std::string& field, const CommandInfo& ci) const {
        const auto dims = node["dims"];
        const auto cones = node["cones"];
        const auto pairs = node["pairs"];
        if (!ci.uses_dims) {
            for (const auto* key : {"dims", "cones", "pairs"})
                if (node[key]) fail(node[key], field + "." + key, fmt::format("not used by '{}'", ci.name));
            return {Item{}};
        }
        if (!ci.uses_cones) {
            for (const auto* key : {"cones", "pairs"})
                if (node[key]) fail(node[key], field + "." + key, fmt::format("not used by '{}'", ci.name));
        }
        auto check_dim = [&](const YAML::Node& at, const std::string& f) {
            const int n = integer(at, f);
            if (n < ci.min_dim || n > ci.max_dim)
                fail(at, f, fmt::format("dimension {} outside [{}, {}] for '{}'", n, ci.min_dim, ci.max_dim, ci.name));
            return n;
        };
        std::vector<Item> out;
        if (pairs) {
            if (dims || cones) fail(pairs, field + ".pairs", "give either pairs or dims/cones, not both");
            if (!pairs.IsSequence() || pairs.size() == 0) fail(pairs, field + ".pairs", "expected a non-empty list");
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                const auto f = fmt::format("{}.pairs[{}]", field, i);
                const auto pr = pairs[i];
                if (!pr.IsSequence() || pr.size() != 2) fail(pr, f, "expected [n, k]");
                const int n = check_dim(pr[0], f + "[0]");
                const int k = integer(pr[1], f + "[1]");
                if (k < 1 || k > n) fail(pr[1], f + "[1]", fmt::format("invalid cone Gamma_{} in dimension {}", k, n));
                out.push_back({n, k});
            }
            return out;
        }
        if (!dims) fail(node, field + ".dims", "missing required field");
        if (!dims.IsSequence() || dims.size() == 0) fail(dims, field + ".dims", "expected a non-empty list");
        std::vector<int> ns;
        for (std::size_t i = 0; i < dims.size(); ++i) ns.push_back(check_dim(dims[i], fmt::format("{}.dims[{}]", field, i)));
        if (!ci.uses_cones) {
            for (int n : ns) out.push_back({n, 0});
            return out;
        }
        std::string mode = "default";
        std::vector<std::pair<int, YAML::Node>> ks;
        if (cones) {
            if (cones.IsScalar()) {
                mode = cones.Scalar();
                if (mode != "all" && mode != "admissible")
                    fail(cones, field + ".cones", "expected a list of k, 'all' or 'admissible'");
            } else if (cones.IsSequence() && cones.size() > 0) {
                mode = "list";
                for (std::size_t i = 0; i < cones.size(); ++i)
                    ks.emplace_back(integer(cones[i], fmt::format("{}.cones[{}]", field, i)), cones[i]);
            } else {
                fail(cones, field + ".cones", "expected a list of k, 'all' or 'admissible'");
            }
        }
        if (mode == "default") {
            const bool restricted = ci.command == Command::VerifyBarrierSub || ci.command == Command::VerifyBarrierSuper ||
                                    ci.command == Command::SolveRadial || ci.command == Command::SolveHomotopy;
            mode = restricted ? "admissible" : "all";
        }
        for (int n : ns) {
            if (mode == "list") {
                for (const auto& [k, at] : ks) {
                    if (k < 1 || k > n) fail(at, field + ".cones", fmt::format("invalid cone Gamma_{} in dimension {}", k, n));
                    out.push_back({n, k});
                }
                continue;
            }
            for (int k = 1; k <= n; ++k) {
                const double mu = static_cast<double>(n - k) / k;
                if (mode == "admissible") {
                    if (ci.command == Command::VerifyBarrierSuper ? !(mu > 1.0) : mu > 1.0) continue;
                }
                out.push_back({n, k});
            }
        }
        if (out.empty()) fail(node, field + ".cones", "selects no (n, k) pair");
        return out;
    }

    std::map<std::string, ParamValue> params(const YAML::Node& node, const std::string& field, Command c) const {
        const auto& schema = schema_for(c);
        if (!node.IsMap()) fail(node, field, "expected a mapping");
        std::map<std::string, ParamValue> out;
        for (const auto& kv : node) {
            const auto key = kv.first.Scalar();
            const auto f = field + "." + key;
            const auto it = schema.find(key);
            if (it == schema.end()) fail(kv.first, f, fmt::format("unknown parameter for '{}'", to_string(c)));
            const auto& spec = it->second;
            const auto& v = kv.second;
            auto check_sign = [&](double x, const YAML::Node& at) {
                if (spec.positive && !(x > 0.0)) fail(at, f, "must be positive");
                if (!spec.positive && x < 0.0) fail(at, f, "must be nonnegative");
            };
            switch (spec.kind) {
                case Kind::Flag:
                    out[key] = scalar<bool>(v, f, "true or false");
                    break;
                case Kind::Number: {
                    const double x = number(v, f);
                    check_sign(x, v);
                    out[key] = x;
                    break;
                }
                case Kind::Integer: {
                    const int x = integer(v, f);
                    check_sign(x, v);
                    out[key] = static_cast<double>(x);
                    break;
                }
                case Kind::Text: {
                    const auto s = scalar<std::string>(v, f, "a string");
                    if (std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
                        std::string all;
                        for (const auto& ch : spec.choices) all += (all.empty() ? "" : ", ") + ch;
                        fail(v, f, fmt::format("unknown value '{}' (expected one of {})", s, all));
                    }
                    out[key] = s;
                    break;
                }
                case Kind::NumberList: {
                    if (!v.IsSequence() || v.size() == 0) fail(v, f, "expected a non-empty list of numbers");
                    std::vector<double> xs;
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        const double x = number(v[i], fmt::format("{}[{}]", f, i));
                        check_sign(x, v[i]);
                        xs.push_back(x);
                    }
                    out[key] = xs;
                    break;
                }
            }
        }
        return out;
    }

    std::string source_;
};

// ------------------------------------------------------------------ running

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::mt19937_64 item_rng(std::uint64_t seed, const std::string& id, const Item& item) {
    const std::uint64_t h = fnv1a(id);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(item.n), static_cast<std::uint32_t>(item.k)};
    return std::mt19937_64(seq);
}

std::string item_label(const Item& it) {
    if (it.n == 0) return "all";
    return it.k == 0 ? fmt::format("n={}", it.n) : fmt::format("n={},k={}", it.n, it.k);
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

struct ItemResult {
    std::string rows;
    int checks = 0;
    std::vector<std::string> failures;
    double margin = kNaN;
    std::vector<std::pair<std::string, std::string>> files;

    void check(bool ok, const std::string& what) {
        ++checks;
        if (!ok) failures.push_back(what);
    }
};

struct Runner {
    std::string header;
    std::string margin_name;
    bool margin_is_max = true;  // worst margin is the largest value
    std::function<ItemResult(const Campaign&, const Item&, std::mt19937_64&)> run;
};

double unif(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

ItemResult run_mu_plus(const Campaign& c, const Item& it, std::mt19937_64&) {
    ItemResult r;
    const double tol = c.number("tolerance", 1e-9);
    const double mu = cones::mu_plus(cones::ConeSpec::gamma_k(it.n, it.k));
    const double expected = static_cast<double>(it.n - it.k) / it.k;
    const double dev = std::abs(mu - expected);
    const bool ok = dev <= tol;
    r.check(ok, fmt::format("mu+ = {} differs from (n-k)/k = {} by {:.3g}", mu, expected, dev));
    r.rows = fmt::format("{},{},{},{},{},{}\n", it.n, it.k, num(mu), num(expected), num(dev), ok ? 1 : 0);
    r.margin = dev;
    return r;
}

ItemResult run_bubble(const Campaign& c, const Item& it, std::mt19937_64& rng) {
    ItemResult r;
    const int instances = c.integer("instances", 20);
    const int samples = c.integer("samples", 10);
    const bool fd = c.text("mode", "analytic") == "fd";
    const auto mode = fd ? conformal::DerivativeMode::finite_difference(c.number("fd_step", 1e-4))
                         : conformal::DerivativeMode::analytic();
    const double tol = c.number("tolerance", bubbles::default_tolerance(mode));
    const double spread = c.number("spread", 3.0);
    const auto f = cones::CurvatureFunction::sigma_k_root(it.n, it.k);
    r.margin = 0.0;
    for (int i = 0; i < instances; ++i) {
        const double a = std::exp(unif(rng, std::log(0.1), std::log(10.0)));
        conformal::Vector p(it.n);
        for (int j = 0; j < it.n; ++j) p[j] = unif(rng, -2.0, 2.0);
        const bubbles::Bubble b(a, p);
        std::vector<conformal::Vector> xs;
        for (int s = 0; s < samples; ++s) {
            conformal::Vector x(it.n);
            for (int j = 0; j < it.n; ++j) x[j] = p[j] + unif(rng, -1.0, 1.0) * spread / (a * std::sqrt(it.n));
            xs.push_back(x);
        }
        const auto rep = bubbles::bubble_verify(f, b, xs, mode, tol);
        r.check(rep.pass, fmt::format("instance {}: eigenvalue deviation {:.3g}, f deviation {:.3g} > {:.3g}", i,
                                      rep.max_eigen_deviation, rep.max_f_deviation, tol));
        r.margin = std::max({r.margin, rep.max_eigen_deviation, rep.max_f_deviation});
        r.rows += fmt::format("{},{},{},{},{},{},{},{}\n", it.n, it.k, i, num(a), num(rep.max_eigen_deviation),
                              num(rep.max_f_deviation), num(tol), rep.pass ? 1 : 0);
    }
    return r;
}

barriers::BarrierSweepConfig sweep_config(const Campaign& c, const Item& it, bool super) {
    auto cfg = super ? barriers::BarrierSweepConfig::super_default(it.n, it.k)
                     : barriers::BarrierSweepConfig::sub_default(it.n, it.k);
    cfg.deltas = c.list("deltas", cfg.deltas);
    if (super) {
        cfg.mus = c.list("mus", cfg.mus);
        cfg.epsilons = c.list("epsilons", cfg.epsilons);
    }
    cfg.r_min = c.number("r_min", cfg.r_min);
    cfg.r1_start = c.number("r1_start", cfg.r1_start);
    cfg.r1_floor = c.number("r1_floor", cfg.r1_floor);
    cfg.r_nodes = c.integer("r_nodes", cfg.r_nodes);
    cfg.directions = c.integer("directions", cfg.directions);
    cfg.background = barriers::background_from_string(c.text("background", to_string(cfg.background)));
    cfg.check_precondition = c.flag("check_precondition", cfg.check_precondition);
    cfg.jobs = 1;
    return cfg;
}

ItemResult run_barrier(const Campaign& c, const Item& it, bool super) {
    ItemResult r;
    const auto cfg = sweep_config(c, it, super);
    const auto rep = super ? barriers::barrier_sweep_super(cfg) : barriers::barrier_sweep_sub(cfg);
    std::string why = fmt::format("certified r1 = {:.4g}", rep.r1);
    if (rep.first_failure) {
        const auto& s = *rep.first_failure;
        why += fmt::format(", first failing sample delta={} mu={} eps={} r={:.4g} margin={:.4g}", s.delta, s.mu, s.eps,
                           s.r, s.margin);
    }
    r.check(rep.pass, why);
    r.margin = rep.worst_margin;
    r.rows = fmt::format("{},{},{},{},{},{},{},{},{}\n", it.n, it.k, rep.pass ? 1 : 0, num(rep.r1), num(rep.worst_margin),
                         num(rep.worst_relative_margin), num(rep.max_remainder_constant), rep.eps_uniform ? 1 : 0,
                         rep.samples.size());
    std::ostringstream os;
    barriers::write_sweep_csv(os, rep);
    r.files.emplace_back(fmt::format("n{}_k{}", it.n, it.k), os.str());
    return r;
}

conformal::Matrix random_symmetric(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    conformal::Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    return 0.5 * (a + a.transpose());
}

ItemResult run_gershgorin(const Campaign& c, const Item& it, std::mt19937_64& rng) {
    ItemResult r;
    const int pairs = c.integer("pairs", 1000);
    const double scale = c.number("scale", 0.1);
    double sharp = 0.0;
    double usage = 0.0;
    int violations = 0;
    for (int i = 0; i < pairs; ++i) {
        const auto m = random_symmetric(it.n, rng);
        const auto mt = conformal::Matrix(m + scale * unif(rng, 0.0, 1.0) * random_symmetric(it.n, rng));
        const auto res = barriers::gershgorin_pairing(m, mt);
        if (!res.within_bound) ++violations;
        sharp = std::max(sharp, res.sharp_constant);
        if (res.bound > 0.0) usage = std::max(usage, res.total_deviation / res.bound);
    }
    r.check(violations == 0, fmt::format("{} of {} pairs exceed n^2 max|dM|", violations, pairs));
    r.margin = usage;
    r.rows = fmt::format("{},{},{},{},{},{}\n", it.n, pairs, num(sharp), num(usage), violations, violations == 0 ? 1 : 0);
    return r;
}

ItemResult run_suph(const Campaign& c, const Item& it, std::mt19937_64&) {
    ItemResult r;
    const double K = c.number("K", 1.0);
    const double delta = c.number("delta", 0.1);
    const auto g = c.text("background", "sphere") == "flat" ? conformal::metrics::flat(it.n)
                                                             : conformal::metrics::sphere_normal(it.n);
    const auto rep = barriers::suph_barrier_check(g, K, delta, c.integer("nodes", 64), c.integer("directions", 8));
    bool monotone = true;
    std::string which;
    for (const auto& [name, ok] : rep.monotone) {
        if (!ok) {
            monotone = false;
            which += " " + name;
        }
    }
    r.check(rep.pass, fmt::format("min G = {:.4g}, min L_g G = {:.4g}, non-monotone:{}", rep.min_G, rep.min_LG,
                                  which.empty() ? " none" : which));
    r.margin = rep.min_LG;
    r.rows = fmt::format("{},{},{},{},{},{},{},{}\n", it.n, num(K), num(delta), num(rep.min_G), num(rep.min_LG),
                         num(rep.bounded_w_limit), monotone ? 1 : 0, rep.pass ? 1 : 0);
    return r;
}

ItemResult run_hawking(const Campaign& c, const Item&, std::mt19937_64&) {
    ItemResult r;
    const double tol = c.number("tolerance", 1e-12);
    r.margin = 0.0;
    auto row = [&](const char* kind, double alpha, double c0, double expected) {
        const double bound = comparison::hawking_bound(alpha, c0);
        const double dev = std::abs(bound - expected) / expected;
        // Relative condition number of c0 -> U; arccoth is ill-conditioned near 1.
        double cond = 1.0;
        if (alpha > 0.0) {
            const double x = c0 / alpha;
            cond = std::max(1.0, x / ((x * x - 1.0) * std::atanh(1.0 / x)));
        }
        const bool exact = alpha == 0.0 && std::string(kind) == "closed";
        const bool ok = exact ? bound == expected : dev <= tol * cond;
        r.check(ok, fmt::format("{} U({}, {}) = {} vs {}", kind, alpha, c0, bound, expected));
        r.margin = std::max(r.margin, dev / cond);
        r.rows += fmt::format("{},{},{},{},{},{},{},{}\n", kind, num(alpha), num(c0), num(bound), num(expected), num(dev),
                              num(cond), ok ? 1 : 0);
    };
    for (double alpha : c.list("alphas", {0.0, 0.5, 1.0})) {
        for (double c0 : c.list("c0", {0.5, 1.0, 2.0, 4.0})) {
            if (alpha >= c0) {
                r.rows += fmt::format("outside,{},{},,,,,\n", num(alpha), num(c0));
                continue;
            }
            const double expected =
                alpha == 0.0 ? 1.0 / c0 : 0.5 * std::log((c0 + alpha) / (c0 - alpha)) / alpha;
            row("closed", alpha, c0, expected);
        }
    }
    // Geodesic balls attain the bound at their center.
    for (double alpha : c.list("alphas", {0.0, 0.5, 1.0}))
        for (double rho : c.list("radii", {0.1, 1.0, 4.0}))
            row("ball", alpha, alpha == 0.0 ? 1.0 / rho : alpha / std::tanh(alpha * rho), rho);
    return r;
}

ItemResult run_bishop_gromov(const Campaign& c, const Item& it, std::mt19937_64&) {
    ItemResult r;
    const auto background = c.text("background", "sphere");
    const double r_min = c.number("r_min", 1e-3);
    const double r_max = c.number("r_max", background == "sphere" ? 3.0 : 5.0);
    const int nodes = c.integer("nodes", 200);
    const double limit_tol = c.number("limit_tolerance", 1e-6);
    if (!(r_max > r_min) || nodes < 2) throw ConfigError("bishop-gromov: need r_max > r_min and nodes >= 2");
    if (background == "sphere" && r_max > std::numbers::pi) throw ConfigError("bishop-gromov: r_max exceeds pi on the sphere");
    std::vector<double> grid;
    for (int i = 0; i < nodes; ++i) grid.push_back(r_min + (r_max - r_min) * i / (nodes - 1));
    const int n = it.n;
    std::function<double(double)> volumes;
    if (background == "sphere") {
        volumes = [n](double s) { return comparison::sphere_ball_volume(n, s); };
    } else if (background == "flat") {
        volumes = [n](double s) { return comparison::unit_ball_volume(n) * std::pow(s, n); };
    } else {
        const auto bg = comparison::ModelSpace::make(n, c.number("background_alpha", 1.0));
        volumes = [bg](double s) { return comparison::model_ball_volume(bg, s); };
    }
    const auto table = comparison::bg_ratio(volumes, comparison::ModelSpace::make(n, c.number("alpha", 0.0)), grid);
    r.check(table.nonincreasing, fmt::format("ratio increases by {:.3g}", table.max_increase));
    const double first = table.rows.front().ratio;
    r.check(first <= 1.0 + limit_tol, fmt::format("ratio {:.10g} at r = {} exceeds 1", first, r_min));
    r.margin = table.max_increase;
    for (const auto& row : table.rows)
        r.rows += fmt::format("{},{},{},{},{}\n", n, num(row.r), num(row.volume), num(row.model_volume), num(row.ratio));
    return r;
}

solver::NewtonOptions newton_options(const Campaign& c) {
    solver::NewtonOptions opt;
    opt.tol = c.number("tolerance", opt.tol);
    return opt;
}

solver::GridPtr make_grid(const Campaign& c, int n, int default_nodes) {
    return solver::RadialGrid::make(n, c.integer("nodes", default_nodes),
                                    solver::discretization_from_string(c.text("discretization", "chebyshev")));
}

std::string transcript(std::span<const solver::ContinuationState> states) {
    std::ostringstream os;
    solver::write_transcript_csv(os, states);
    return os.str();
}

ItemResult run_solve_radial(const Campaign& c, const Item& it, std::mt19937_64&) {
    ItemResult r;
    const int n = it.n;
    const double check_tol = c.number("check_tolerance", 1e-8);
    const double eps = c.number("perturbation", 0.2);
    const auto grid = make_grid(c, n, 128);
    const solver::Problem p{solver::Family::Curvature, cones::CurvatureFunction::sigma_k_root(n, it.k), {}};
    const double s0 = 2.0 / (n - 2);
    solver::ContinuationOptions copt;
    copt.newton = newton_options(c);

    int iterations = 0;
    double newton_residual = kNaN;
    double max_dev = 0.0;
    double min_cone = kNaN;
    double min_ricci = kNaN;
    std::size_t count = 0;
    double final_s = s0;
    try {
        const auto start = solver::RadialProfile::sample(grid, [eps](double th) { return 1.0 + eps * std::cos(th); });
        const auto res = solver::solve(p, start, s0, 1.0, copt.newton);
        iterations = res.iterations;
        newton_residual = res.residual;
        r.check(res.converged && res.residual < check_tol,
                fmt::format("Newton at s = {:.4g}: {} (residual {:.3g})", s0, res.message, res.residual));
        const solver::RadialProfile fixed{grid, res.u};
        const auto path = solver::s_schedule(c.integer("steps", 20));
        const auto states = solver::newton_continuation(p, solver::evaluate_state(p, fixed, s0, 1.0), path, copt);
        count = states.size();
        final_s = states.back().s;
        min_cone = std::numeric_limits<double>::infinity();
        min_ricci = std::numeric_limits<double>::infinity();
        for (const auto& st : states) {
            max_dev = std::max(max_dev, (st.profile.u.array() - 1.0).abs().maxCoeff());
            min_cone = std::min(min_cone, st.margins.min_cone_margin);
            min_ricci = std::min(min_ricci, st.margins.min_ricci_margin);
        }
        r.check(final_s == 0.0, fmt::format("continuation stopped at s = {}", final_s));
        r.check(max_dev < check_tol, fmt::format("max |u - 1| = {:.3g} along the path", max_dev));
        r.check(min_cone > 0.0, fmt::format("cone margin {:.3g} along the path", min_cone));
        r.check(min_ricci >= 0.0, fmt::format("Ricci margin {:.3g} along the path", min_ricci));
        r.files.emplace_back(fmt::format("n{}_k{}", n, it.k), transcript(states));
    } catch (const NumericalError& e) {
        r.check(false, e.what());
    } catch (const DomainError& e) {
        r.check(false, e.what());
    }
    r.margin = min_cone;
    const bool ok = r.failures.empty();
    r.rows = fmt::format("{},{},{},{},{},{},{},{},{},{}\n", n, it.k, iterations, num(newton_residual), count, num(final_s),
                         num(max_dev), num(min_cone), num(min_ricci), ok ? 1 : 0);
    return r;
}

ItemResult run_solve_homotopy(const Campaign& c, const Item& it, std::mt19937_64&) {
    ItemResult r;
    const int n = it.n;
    const double check_tol = c.number("check_tolerance", 1e-8);
    const int steps = c.integer("steps", 20);
    const auto grid = make_grid(c, n, 64);
    solver::ContinuationOptions copt;
    copt.newton = newton_options(c);
    const auto one = solver::RadialProfile::constant(grid, 1.0);
    r.margin = std::numeric_limits<double>::infinity();

    // G_t leg at s = 2/(n-2): the constant solution c(t).
    try {
        const solver::Problem p{solver::Family::Curvature, cones::CurvatureFunction::sigma_k_root(n, it.k), {}};
        const auto path = solver::t_schedule(steps);
        const auto states = solver::newton_continuation(p, solver::evaluate_state(p, one, 2.0 / (n - 2), 1.0), path, copt);
        double dev = 0.0;
        double cone = std::numeric_limits<double>::infinity();
        for (const auto& st : states) {
            const double ct = solver::gt_constant_solution(n, st.t);
            dev = std::max(dev, (st.profile.u.array() - ct).abs().maxCoeff() / ct);
            cone = std::min(cone, st.margins.min_cone_margin);
        }
        const bool ok = states.back().t == 0.0 && dev < check_tol && cone > 0.0;
        r.check(ok, fmt::format("G_t leg: final t = {}, relative deviation from c(t) {:.3g}, cone margin {:.3g}",
                                states.back().t, dev, cone));
        r.margin = std::min(r.margin, cone);
        r.rows += fmt::format("{},{},gt,{},{},{},{},{}\n", n, it.k, states.size(), num(states.back().t), num(dev),
                              num(cone), ok ? 1 : 0);
        r.files.emplace_back(fmt::format("n{}_k{}_gt", n, it.k), transcript(states));
    } catch (const NumericalError& e) {
        r.check(false, fmt::format("G_t leg: {}", e.what()));
        r.rows += fmt::format("{},{},gt,0,,,,0\n", n, it.k);
    }

    // H_t path t: 0 -> 1 from u = 1 to the semilinear constant.
    try {
        const solver::Problem p{solver::Family::Semilinear, cones::CurvatureFunction::sigma_k_root(n, it.k), {}};
        const std::vector<solver::PathSegment> path{{solver::Parameter::T, 1.0, steps}};
        const auto states = solver::newton_continuation(p, solver::evaluate_state(p, one, 0.0, 0.0), path, copt);
        const double target = solver::g0_constant_solution(n);
        const double dev = (states.back().profile.u.array() - target).abs().maxCoeff() / target;
        const bool ok = states.back().t == 1.0 && dev < check_tol;
        r.check(ok, fmt::format("H_t path: final t = {}, relative deviation from the constant {:.3g}",
                                states.back().t, dev));
        r.rows += fmt::format("{},{},ht,{},{},{},,{}\n", n, it.k, states.size(), num(states.back().t), num(dev),
                              ok ? 1 : 0);
        r.files.emplace_back(fmt::format("n{}_k{}_ht", n, it.k), transcript(states));
    } catch (const NumericalError& e) {
        r.check(false, fmt::format("H_t path: {}", e.what()));
        r.rows += fmt::format("{},{},ht,0,,,,0\n", n, it.k);
    }

    // Linearization of H_0 at u = 1.
    const auto spec = solver::linearized_H0_spectrum(grid, 3);
    const double dev = std::abs(spec.eigenvalues.front() + 2.0);
    const bool ok = spec.nonpositive_count == 1 && dev < 1e-6 && spec.ground_state_spread < 1e-6;
    r.check(ok, fmt::format("H_0 spectrum: {} nonpositive eigenvalues, lowest {:.10g}, eigenvector spread {:.3g}",
                            spec.nonpositive_count, spec.eigenvalues.front(), spec.ground_state_spread));
    r.rows += fmt::format("{},{},h0,{},{},{},,{}\n", n, it.k, spec.nonpositive_count, num(spec.eigenvalues.front()),
                          num(dev), ok ? 1 : 0);
    if (!std::isfinite(r.margin)) r.margin = kNaN;
    return r;
}

Runner runner(Command c) {
    switch (c) {
        case Command::ConesMuPlus:
            return {"n,k,mu_plus,expected,deviation,pass", "max_deviation", true, run_mu_plus};
        case Command::VerifyBubble:
            return {"n,k,instance,a,max_eigen_deviation,max_f_deviation,tolerance,pass", "max_deviation", true,
                    run_bubble};
        case Command::VerifyBarrierSub:
            return {"n,k,pass,r1,worst_margin,worst_relative_margin,max_remainder_constant,eps_uniform,samples",
                    "max_cone_margin", true, [](const Campaign& cc, const Item& it, std::mt19937_64&) {
                        return run_barrier(cc, it, false);
                    }};
        case Command::VerifyBarrierSuper:
            return {"n,k,pass,r1,worst_margin,worst_relative_margin,max_remainder_constant,eps_uniform,samples",
                    "min_cone_margin", false, [](const Campaign& cc, const Item& it, std::mt19937_64&) {
                        return run_barrier(cc, it, true);
                    }};
        case Command::VerifyGershgorin:
            return {"n,pairs,sharp_constant,max_bound_usage,violations,pass", "max_bound_usage", true, run_gershgorin};
        case Command::VerifySupH:
            return {"n,K,delta,min_G,min_LG,bounded_w_limit,monotone,pass", "min_LG", false, run_suph};
        case Command::CompareHawking:
            return {"kind,alpha,c0,bound,expected,relative_deviation,condition,pass", "max_scaled_deviation", true, run_hawking};
        case Command::CompareBishopGromov:
            return {"n,r,volume,model_volume,ratio", "max_increase", true, run_bishop_gromov};
        case Command::SolveRadial:
            return {"n,k,newton_iterations,newton_residual,states,final_s,max_deviation,min_cone_margin,"
                    "min_ricci_margin,pass",
                    "min_cone_margin", false, run_solve_radial};
        case Command::SolveHomotopy:
            return {"n,k,leg,states,final_value,deviation,min_cone_margin,pass", "min_cone_margin", false,
                    run_solve_homotopy};
    }
    throw std::logic_error("unknown command");
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_csv(const fs::path& path, const std::string& stamp, const std::string& body) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    os << "# generated " << stamp << '\n' << body;
}

json margin_json(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

// ------------------------------------------------------------------ public

std::string to_string(Command c) { return info(c).name; }

Command command_from_string(const std::string& s) {
    for (const auto& e : command_table())
        if (s == e.name) return e.command;
    std::string all;
    for (const auto& e : command_table()) all += (all.empty() ? "" : ", ") + std::string(e.name);
    throw ConfigError(fmt::format("unknown command '{}' (expected one of {})", s, all));
}

std::vector<Command> all_commands() {
    std::vector<Command> out;
    for (const auto& e : command_table()) out.push_back(e.command);
    return out;
}

double Campaign::number(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : std::get<double>(it->second);
}

int Campaign::integer(const std::string& key, int fallback) const {
    return static_cast<int>(number(key, fallback));
}

bool Campaign::flag(const std::string& key, bool fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : std::get<bool>(it->second);
}

std::string Campaign::text(const std::string& key, const std::string& fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : std::get<std::string>(it->second);
}

std::vector<double> Campaign::list(const std::string& key, std::vector<double> fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : std::get<std::vector<double>>(it->second);
}

CampaignConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(fmt::format("{}:{}:{}: <syntax>: {}", source, e.mark.line + 1, e.mark.column + 1, e.msg));
    }
    return Parser(source).config(root);
}

CampaignConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("{}: cannot open configuration file", path.string()));
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), path.string());
}

CampaignReport run_campaign(const Campaign& c, std::uint64_t seed, int jobs, const fs::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = runner(c.command);
    std::vector<ItemResult> results(c.items.size());
    parallel_for(c.items.size(), jobs, [&](std::size_t i) {
        auto rng = item_rng(seed, c.id, c.items[i]);
        results[i] = r.run(c, c.items[i], rng);
    });

    CampaignReport rep;
    rep.id = c.id;
    rep.command = c.command;
    rep.expect_pass = c.expect_pass;
    rep.margin_name = r.margin_name;
    rep.worst_margin = kNaN;
    std::string body = r.header + "\n";
    fs::create_directories(out);
    const auto stamp = timestamp();
    std::vector<Failure> failed;
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& res = results[i];
        body += res.rows;
        rep.checks += res.checks;
        for (const auto& f : res.failures) failed.push_back({item_label(c.items[i]), f});
        if (!std::isnan(res.margin)) {
            if (std::isnan(rep.worst_margin)) rep.worst_margin = res.margin;
            else rep.worst_margin = r.margin_is_max ? std::max(rep.worst_margin, res.margin)
                                                    : std::min(rep.worst_margin, res.margin);
        }
        for (const auto& [suffix, content] : res.files) {
            const auto name = fmt::format("{}_{}.csv", c.id, suffix);
            write_csv(out / name, stamp, content);
            rep.files.push_back(name);
        }
    }
    const auto main_name = c.id + ".csv";
    write_csv(out / main_name, stamp, body);
    rep.files.insert(rep.files.begin(), main_name);

    if (c.expect_pass) {
        rep.failures = std::move(failed);
        rep.pass = rep.failures.empty();
    } else {
        rep.pass = !failed.empty();
        if (!rep.pass) rep.failures.push_back({"all", "expected at least one failing check, all passed"});
    }
    rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

json report_to_json(const CampaignReport& r, std::uint64_t seed) {
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"item", f.item}, {"message", f.message}});
    return {{"schema_version", kSchemaVersion},
            {"kind", "campaign"},
            {"campaign", r.id},
            {"command", to_string(r.command)},
            {"seed", seed},
            {"expect", r.expect_pass ? "pass" : "fail"},
            {"pass", r.pass},
            {"checks", r.checks},
            {"failures", failures},
            {"worst_margin", {{"name", r.margin_name}, {"value", margin_json(r.worst_margin)}}},
            {"runtime_seconds", r.runtime_seconds},
            {"generated", timestamp()},
            {"files", r.files}};
}

json merge_reports(std::span<const json> reports) {
    json campaigns = json::array();
    auto add = [&](const json& c) {
        campaigns.push_back({{"campaign", c.at("campaign")},
                             {"command", c.value("command", "")},
                             {"pass", c.at("pass")},
                             {"checks", c.value("checks", 0)},
                             {"failures", c.value("failures", json::array())},
                             {"worst_margin", c.value("worst_margin", json(nullptr))},
                             {"runtime_seconds", c.value("runtime_seconds", 0.0)}});
    };
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& doc = reports[i];
        if (!doc.is_object() || !doc.contains("schema_version"))
            throw ConfigError(fmt::format("report {}: missing schema_version", i));
        if (doc["schema_version"] != kSchemaVersion)
            throw ConfigError(fmt::format("report {}: schema_version {} does not match {}", i,
                                          doc["schema_version"].dump(), kSchemaVersion));
        try {
            const auto kind = doc.value("kind", std::string("campaign"));
            if (kind == "summary") {
                for (const auto& c : doc.at("campaigns")) add(c);
            } else if (kind == "campaign") {
                add(doc);
            } else {
                throw ConfigError(fmt::format("report {}: unknown kind '{}'", i, kind));
            }
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("report {}: malformed report: {}", i, e.what()));
        }
    }
    int passed = 0;
    double runtime = 0.0;
    json failing = json::array();
    json margins = json::object();
    json runtimes = json::object();
    for (const auto& c : campaigns) {
        const auto id = c["campaign"].get<std::string>();
        if (c["pass"].get<bool>()) ++passed;
        else failing.push_back(id);
        runtime += c["runtime_seconds"].get<double>();
        margins[id] = c["worst_margin"];
        runtimes[id] = c["runtime_seconds"];
    }
    const int total = static_cast<int>(campaigns.size());
    return {{"schema_version", kSchemaVersion},
            {"kind", "summary"},
            {"pass", failing.empty()},
            {"total", total},
            {"passed", passed},
            {"failed", total - passed},
            {"failing_campaigns", failing},
            {"worst_margins", margins},
            {"runtime_seconds", runtimes},
            {"total_runtime_seconds", runtime},
            {"campaigns", campaigns}};
}

json merge_report_files(std::span<const fs::path> files) {
    std::vector<json> docs;
    for (const auto& f : files) {
        std::ifstream is(f);
        if (!is) throw ConfigError(fmt::format("{}: cannot open report", f.string()));
        try {
            docs.push_back(json::parse(is));
        } catch (const json::parse_error& e) {
            throw ConfigError(fmt::format("{}: invalid JSON: {}", f.string(), e.what()));
        }
    }
    return merge_reports(docs);
}

namespace {

int usage_error(std::ostream& err, const std::string& message) {
    err << "error: " << message << '\n';
    err << json{{"status", "error"}, {"exit_code", 2}, {"message", message}}.dump() << '\n';
    return static_cast<int>(ExitCode::UsageError);
}

void list_campaigns(std::ostream& out, const CampaignConfig* cfg) {
    if (!cfg) {
        for (auto c : all_commands()) out << to_string(c) << '\n';
        return;
    }
    for (const auto& c : cfg->campaigns) {
        std::string items;
        for (const auto& it : c.items) items += (items.empty() ? "" : " ") + item_label(it);
        out << fmt::format("{}\t{}\t{}\t{}\n", c.id, to_string(c.command), c.expect_pass ? "expect-pass" : "expect-fail",
                           items);
    }
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Verification campaigns and radial solves for sigma_k curvature problems", "sigmak"};
    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool list = false;
    app.add_option("--config", config_path, "campaign file (YAML)");
    auto* out_opt = app.add_option("--out", out_dir, "report directory (overrides the config)");
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized campaigns (overrides the config)");
    app.add_flag("--list", list, "list campaigns of the config, or the available commands");

    auto* merge = app.add_subcommand("merge", "merge campaign reports into one summary");
    std::vector<std::string> merge_inputs;
    std::string merge_output;
    merge->add_option("reports", merge_inputs, "report JSON files");
    merge->add_option("-o,--output", merge_output, "summary file (default: standard output)");
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return usage_error(err, e.what());
    }

    try {
        if (merge->parsed()) {
            std::vector<fs::path> paths(merge_inputs.begin(), merge_inputs.end());
            const auto summary = merge_report_files(paths);
            if (merge_output.empty()) {
                out << summary.dump(2) << '\n';
            } else {
                std::ofstream os(merge_output);
                if (!os) return usage_error(err, fmt::format("cannot write {}", merge_output));
                os << summary.dump(2) << '\n';
            }
            if (!summary["pass"].get<bool>()) {
                err << json{{"status", "fail"}, {"exit_code", 1}, {"failing_campaigns", summary["failing_campaigns"]}}
                           .dump()
                    << '\n';
                return static_cast<int>(ExitCode::AssertionFailure);
            }
            return 0;
        }

        if (config_path.empty()) {
            if (list) {
                list_campaigns(out, nullptr);
                return 0;
            }
            return usage_error(err, "--config is required (or use --list, merge, --help)");
        }
        auto cfg = load_config(config_path);
        if (*out_opt) cfg.out = out_dir;
        if (*jobs_opt) cfg.jobs = jobs;
        if (*seed_opt) cfg.seed = seed;
        if (list) {
            list_campaigns(out, &cfg);
            return 0;
        }

        std::vector<json> docs;
        json failures = json::array();
        json failing = json::array();
        for (const auto& c : cfg.campaigns) {
            const auto rep = run_campaign(c, cfg.seed, cfg.jobs, cfg.out);
            auto doc = report_to_json(rep, cfg.seed);
            {
                std::ofstream os(cfg.out / (c.id + ".json"));
                os << doc.dump(2) << '\n';
            }
            out << fmt::format("{} {} [{}] checks={} {:.3f}s\n", rep.pass ? "PASS" : "FAIL", rep.id,
                               to_string(rep.command), rep.checks, rep.runtime_seconds);
            if (!rep.pass) {
                failing.push_back(rep.id);
                for (const auto& f : rep.failures)
                    failures.push_back({{"campaign", rep.id}, {"item", f.item}, {"message", f.message}});
            }
            docs.push_back(std::move(doc));
        }
        const auto summary = merge_reports(docs);
        {
            std::ofstream os(cfg.out / "summary.json");
            os << summary.dump(2) << '\n';
        }
        if (!failing.empty()) {
            err << json{{"status", "fail"}, {"exit_code", 1}, {"failing_campaigns", failing}, {"failures", failures}}
                       .dump()
                << '\n';
            return static_cast<int>(ExitCode::AssertionFailure);
        }
        return 0;
    } catch (const ConfigError& e) {
        return usage_error(err, e.what());
    } catch (const std::invalid_argument& e) {
        return usage_error(err, e.what());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        err << json{{"status", "fail"}, {"exit_code", 1}, {"message", e.what()}}.dump() << '\n';
        return static_cast<int>(ExitCode::AssertionFailure);
    }
}

}  // namespace sigmak::cli
