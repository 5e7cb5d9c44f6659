#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gratlab/errors.hpp"
#include "gratlab/modes.hpp"

namespace gratlab {

enum class Command { Solve, Sweep, Mc, Efficiency };

inline std::string command_name(Command c) {
    switch (c) {
        case Command::Solve: return "solve";
        case Command::Sweep: return "sweep";
        case Command::Mc: return "mc";
        case Command::Efficiency: return "efficiency";
    }
    return "?";
}

struct ProfileSpec {
    std::string kind = "flat"; // flat | trig | samples | kl
    // trig
    double a0 = 0.0;
    std::vector<double> cos_coeffs, sin_coeffs;
    // samples
    std::vector<double> values;
    // kl
    double sigma = 0.0;
    double ell = 0.0;
    int J = -1; // -1: auto truncation
    double mean_a0 = 0.0;
    std::vector<double> mean_cos, mean_sin;
};

struct RunConfig {
    Command command = Command::Solve;
    // wave
    double k = 0.0;                  // solve/mc/efficiency
    std::vector<double> k_grid;      // sweep
    double theta = 0.0;
    double Lambda = 2.0 * pi;
    double b = 1.0;
    // profile
    ProfileSpec profile;
    // numerics (0 = auto)
    int N = 0, M = 0, P = 0;
    double gamma0 = 0.0;
    // stability
    double eps_min = 0.2;
    bool fit_exponent = false; // sweep: fit log(quotient) vs log(k) on the reduced branch
    // mc
    int n_samples = 64;
    std::uint64_t seed = 1;
    // output
    std::string out_dir = ".";
    std::vector<std::string> formats{"csv"};
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& section,
                           std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) { ok = true; break; }
        if (!ok)
            throw ParseError("unknown key '" + it.key() + "'" +
                             (section.empty() ? "" : " in section '" + section + "'"));
    }
}

inline double num_or_auto(const json& v, const std::string& field) {
    if (v.is_string() && v.get<std::string>() == "auto") return 0.0;
    if (!v.is_number()) throw ParseError("'" + field + "' must be a number or \"auto\"");
    return v.get<double>();
}

} // namespace detail

inline RunConfig config_from_json(const nlohmann::json& root);

/// Parse a structured run configuration (JSON). Unknown keys are errors.
/// A previously emitted run manifest is also accepted: its embedded
/// "config" object is used.
inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file " + path.string());
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    if (root.is_object() && root.contains("config") && root.contains("versions"))
        return config_from_json(root.at("config")); // run manifest
    return config_from_json(root);
}

inline RunConfig config_from_json(const nlohmann::json& root) {
    using detail::reject_unknown;
    using nlohmann::json;
    if (!root.is_object()) throw ParseError("config root must be an object");
    reject_unknown(root, "", {"command", "wave", "profile", "numerics", "stability", "mc", "output"});

    RunConfig c;
    if (!root.contains("command")) throw ParseError("missing 'command'");
    const std::string cmd = root.at("command").get<std::string>();
    if (cmd == "solve") c.command = Command::Solve;
    else if (cmd == "sweep") c.command = Command::Sweep;
    else if (cmd == "mc") c.command = Command::Mc;
    else if (cmd == "efficiency") c.command = Command::Efficiency;
    else throw ValidationError("command", "one of solve|sweep|mc|efficiency");

    if (!root.contains("wave")) throw ParseError("missing 'wave' section");
    const json& w = root.at("wave");
    reject_unknown(w, "wave", {"k", "k_grid", "theta", "Lambda", "b"});
    const bool has_k = w.contains("k"), has_grid = w.contains("k_grid");
    if (c.command == Command::Sweep) {
        if (!has_grid || has_k)
            throw ValidationError("wave", "sweep requires 'k_grid' (and no 'k')");
        c.k_grid = w.at("k_grid").get<std::vector<double>>();
        if (c.k_grid.empty()) throw ValidationError("k_grid", "non-empty");
        for (std::size_t i = 1; i < c.k_grid.size(); ++i)
            if (!(c.k_grid[i] > c.k_grid[i - 1]))
                throw ValidationError("k_grid", "finite and strictly ascending");
        for (double kk : c.k_grid)
            if (!(kk > 0.0)) throw ValidationError("k_grid", "> 0");
    } else {
        if (!has_k || has_grid)
            throw ValidationError("wave", "'" + cmd + "' requires 'k' (and no 'k_grid')");
        c.k = w.at("k").get<double>();
        if (!(c.k > 0.0)) throw ValidationError("k", "> 0");
    }
    if (w.contains("theta")) c.theta = w.at("theta").get<double>();
    if (!(c.theta > -pi / 2 && c.theta < pi / 2))
        throw ValidationError("theta", "in (-pi/2, pi/2)");
    if (w.contains("Lambda")) c.Lambda = w.at("Lambda").get<double>();
    if (!(c.Lambda > 0.0)) throw ValidationError("Lambda", "> 0");
    if (w.contains("b")) c.b = w.at("b").get<double>();
    if (!(c.b > 0.0)) throw ValidationError("b", "> 0");

    if (!root.contains("profile")) throw ParseError("missing 'profile' section");
    const json& p = root.at("profile");
    reject_unknown(p, "profile",
                   {"kind", "a0", "cos", "sin", "values", "sigma", "ell", "J", "mean"});
    c.profile.kind = p.contains("kind") ? p.at("kind").get<std::string>() : "flat";
    if (c.profile.kind == "flat") {
        reject_unknown(p, "profile", {"kind"});
    } else if (c.profile.kind == "trig") {
        reject_unknown(p, "profile", {"kind", "a0", "cos", "sin"});
        if (p.contains("a0")) c.profile.a0 = p.at("a0").get<double>();
        if (p.contains("cos")) c.profile.cos_coeffs = p.at("cos").get<std::vector<double>>();
        if (p.contains("sin")) c.profile.sin_coeffs = p.at("sin").get<std::vector<double>>();
    } else if (c.profile.kind == "samples") {
        reject_unknown(p, "profile", {"kind", "values"});
        if (!p.contains("values")) throw ParseError("samples profile requires 'values'");
        c.profile.values = p.at("values").get<std::vector<double>>();
        if (c.profile.values.size() < 2) throw ValidationError("profile.values", "at least 2 samples");
    } else if (c.profile.kind == "kl") {
        reject_unknown(p, "profile", {"kind", "sigma", "ell", "J", "mean"});
        if (!p.contains("sigma") || !p.contains("ell"))
            throw ParseError("kl profile requires 'sigma' and 'ell'");
        c.profile.sigma = p.at("sigma").get<double>();
        c.profile.ell = p.at("ell").get<double>();
        if (!(c.profile.sigma >= 0.0)) throw ValidationError("profile.sigma", ">= 0");
        if (!(c.profile.ell > 0.0 && c.profile.ell < c.Lambda / 4.0))
            throw ValidationError("profile.ell", "in (0, Lambda/4)");
        if (p.contains("J")) {
            c.profile.J = p.at("J").get<int>();
            if (c.profile.J < 1) throw ValidationError("profile.J", ">= 1");
        }
        if (p.contains("mean")) {
            const json& m = p.at("mean");
            reject_unknown(m, "profile.mean", {"a0", "cos", "sin"});
            if (m.contains("a0")) c.profile.mean_a0 = m.at("a0").get<double>();
            if (m.contains("cos")) c.profile.mean_cos = m.at("cos").get<std::vector<double>>();
            if (m.contains("sin")) c.profile.mean_sin = m.at("sin").get<std::vector<double>>();
        }
    } else {
        throw ValidationError("profile.kind", "one of flat|trig|samples|kl");
    }

    if (root.contains("numerics")) {
        const json& nsec = root.at("numerics");
        reject_unknown(nsec, "numerics", {"N", "M", "P", "gamma0"});
        if (nsec.contains("N")) c.N = static_cast<int>(detail::num_or_auto(nsec.at("N"), "N"));
        if (nsec.contains("M")) c.M = static_cast<int>(detail::num_or_auto(nsec.at("M"), "M"));
        if (nsec.contains("P")) c.P = static_cast<int>(detail::num_or_auto(nsec.at("P"), "P"));
        if (nsec.contains("gamma0")) c.gamma0 = detail::num_or_auto(nsec.at("gamma0"), "gamma0");
        if (c.N < 0 || c.M < 0 || c.P < 0 || c.gamma0 < 0.0)
            throw ValidationError("numerics", "nonnegative (0 or \"auto\" for automatic)");
    }

    if (root.contains("stability")) {
        const json& s = root.at("stability");
        reject_unknown(s, "stability", {"eps_min", "fit_exponent"});
        if (s.contains("eps_min")) c.eps_min = s.at("eps_min").get<double>();
        if (!(c.eps_min > 0.0)) throw ValidationError("eps_min", "> 0");
        if (s.contains("fit_exponent")) c.fit_exponent = s.at("fit_exponent").get<bool>();
    }

    if (root.contains("mc")) {
        const json& m = root.at("mc");
        reject_unknown(m, "mc", {"n_samples", "seed"});
        if (m.contains("n_samples")) c.n_samples = m.at("n_samples").get<int>();
        if (c.command == Command::Mc && c.n_samples < 2)
            throw ValidationError("mc.n_samples", ">= 2");
        if (m.contains("seed")) c.seed = m.at("seed").get<std::uint64_t>();
    } else if (c.command == Command::Mc) {
        throw ParseError("missing 'mc' section for the mc command");
    }
    if (c.command == Command::Mc && c.profile.kind != "kl")
        throw ValidationError("profile.kind", "'kl' for the mc command");

    if (root.contains("output")) {
        const json& o = root.at("output");
        reject_unknown(o, "output", {"directory", "formats"});
        if (o.contains("directory")) c.out_dir = o.at("directory").get<std::string>();
        if (o.contains("formats")) {
            c.formats = o.at("formats").get<std::vector<std::string>>();
            for (const auto& f : c.formats)
                if (f != "csv") throw ValidationError("output.formats", "[\"csv\"]");
        }
    }
    return c;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["command"] = command_name(c.command);
    nlohmann::json w;
    if (c.command == Command::Sweep) w["k_grid"] = c.k_grid;
    else w["k"] = c.k;
    w["theta"] = c.theta;
    w["Lambda"] = c.Lambda;
    w["b"] = c.b;
    j["wave"] = w;
    nlohmann::json p;
    p["kind"] = c.profile.kind;
    if (c.profile.kind == "trig") {
        p["a0"] = c.profile.a0;
        p["cos"] = c.profile.cos_coeffs;
        p["sin"] = c.profile.sin_coeffs;
    } else if (c.profile.kind == "samples") {
        p["values"] = c.profile.values;
    } else if (c.profile.kind == "kl") {
        p["sigma"] = c.profile.sigma;
        p["ell"] = c.profile.ell;
        if (c.profile.J >= 0) p["J"] = c.profile.J;
        nlohmann::json m;
        m["a0"] = c.profile.mean_a0;
        m["cos"] = c.profile.mean_cos;
        m["sin"] = c.profile.mean_sin;
        p["mean"] = m;
    }
    j["profile"] = p;
    j["numerics"] = {{"N", c.N}, {"M", c.M}, {"P", c.P}, {"gamma0", c.gamma0}};
    j["stability"] = {{"eps_min", c.eps_min}, {"fit_exponent", c.fit_exponent}};
    j["mc"] = {{"n_samples", c.n_samples}, {"seed", c.seed}};
    j["output"] = {{"directory", c.out_dir}, {"formats", c.formats}};
    return j;
}

} // namespace gratlab
