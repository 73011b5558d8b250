#include "n4d/cache.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

#include "n4d/util.hpp"

namespace n4d {

std::string operator_cache_key(const ProblemConfig& cfg) {
    nlohmann::ordered_json j;
    j["n"] = cfg.grid.n;
    j["m"] = cfg.m;
    j["b"] = format_sig(cfg.grid.b, 17);
    j["omega2_half"] = format_sig(cfg.omega2_half, 17);
    j["gamma_prime"] = std::to_string(cfg.gamma_p.numerator()) + "/" + std::to_string(cfg.gamma_p.denominator());
    j["coulomb_c"] = format_sig(cfg.coulomb_c, 17);
    j["coincidence"] = format_sig(cfg.coincidence.factor, 17);
    const std::string s = j.dump();
    // FNV-1a, stable across platforms unlike std::hash
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf) + " " + s;
}

void save_operators(const std::string& path, const std::string& key, const SubspaceOperators& ops) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write operator cache " + path);
    nlohmann::ordered_json h;
    h["key"] = key;
    h["m"] = ops.m;
    h["h"] = format_sig(ops.h, 17);
    h["dim"] = ops.H0.rows();
    h["has_pair"] = ops.has_pair();
    f << h.dump() << "\n";
    auto put = [&](const Eigen::MatrixXd& a) {
        f.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    };
    put(ops.H0);
    put(ops.B);
    if (ops.has_pair()) put(ops.C);
    if (!f) throw std::runtime_error("failed writing operator cache " + path);
}

std::optional<SubspaceOperators> load_operators(const std::string& path, const std::string& key) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return std::nullopt;
    std::string line;
    if (!std::getline(f, line)) return std::nullopt;
    nlohmann::json h = nlohmann::json::parse(line, nullptr, false);
    if (h.is_discarded() || h.value("key", std::string()) != key) return std::nullopt;
    SubspaceOperators ops;
    ops.m = h["m"].get<int>();
    ops.h = std::stod(h["h"].get<std::string>());
    const Eigen::Index d = h["dim"].get<Eigen::Index>();
    auto get = [&](Eigen::MatrixXd& a) {
        a.resize(d, d);
        f.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    };
    get(ops.H0);
    get(ops.B);
    if (h["has_pair"].get<bool>()) get(ops.C);
    if (!f) return std::nullopt;
    return ops;
}

}  // namespace n4d
