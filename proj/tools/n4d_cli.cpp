// Command line front end: levels, dos, density, entanglement, convergence, verify.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "n4d/cache.hpp"
#include "n4d/observables.hpp"
#include "n4d/solver.hpp"
#include "n4d/util.hpp"
#include "n4d/verify.hpp"

namespace fs = std::filesystem;
using namespace n4d;

namespace {

struct RunConfig {
    ProblemConfig problem;
    std::vector<std::string> irreps;
    std::string out = "out";
    std::string cache;  // directory for operator blobs, empty disables
    double eta = 0.01;
    int occ1 = 0, occ2 = 0;
    std::vector<std::string> states;
    std::vector<int> levels{1, 2, 5, 7};
    int n_min = 10, n_max = 30, n_step = 2;
    // echo of the effective key=value settings
    std::map<std::string, std::string> echo;
};

Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("gamma_prime must be a rational p/q, got '" + s + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, sep);)
        if (!t.empty()) v.push_back(t);
    return v;
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

const std::vector<std::string> kKeys = {"n",          "m",        "b",         "omega2_half", "coulomb_c",
                                        "gamma_prime", "irreps",  "out",       "threads",     "memory_budget_gib",
                                        "eta",        "occupied", "coincidence", "pencil",    "cache",
                                        "states",     "levels",   "n_range"};

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" + k + "'");
        kv[k] = v;
    }
    return kv;
}

RunConfig build_config(const std::map<std::string, std::string>& kv) {
    RunConfig rc;
    int n = 30;
    double b = 1.0;
    for (auto& [k, v] : kv) {
        try {
            if (k == "n") n = std::stoi(v);
            else if (k == "m") rc.problem.m = std::stoi(v);
            else if (k == "b") b = std::stod(v);
            else if (k == "omega2_half") rc.problem.omega2_half = std::stod(v);
            else if (k == "coulomb_c") rc.problem.coulomb_c = std::stod(v);
            else if (k == "gamma_prime") rc.problem.gamma_p = parse_rational(v);
            else if (k == "irreps") rc.irreps = split(v, ',');
            else if (k == "out") rc.out = v;
            else if (k == "threads") rc.problem.threads = std::stoi(v);
            else if (k == "memory_budget_gib") rc.problem.memory_budget = std::stod(v) * 1024.0 * 1024.0 * 1024.0;
            else if (k == "eta") rc.eta = std::stod(v);
            else if (k == "occupied") {
                auto p = split(v, ',');
                if (p.size() != 2) throw std::invalid_argument("occupied expects m1,m2");
                rc.occ1 = std::stoi(p[0]);
                rc.occ2 = std::stoi(p[1]);
            } else if (k == "coincidence") rc.problem.coincidence = CoincidenceRule::parse(v);
            else if (k == "pencil") rc.problem.pencil = pencil_mode_from_string(v);
            else if (k == "cache") rc.cache = v;
            else if (k == "states") rc.states = split(v, ',');
            else if (k == "levels") {
                rc.levels.clear();
                for (auto& t : split(v, ',')) rc.levels.push_back(std::stoi(t));
            } else if (k == "n_range") {
                auto p = split(v, ':');
                if (p.size() != 3) throw std::invalid_argument("n_range expects min:max:step");
                rc.n_min = std::stoi(p[0]);
                rc.n_max = std::stoi(p[1]);
                rc.n_step = std::stoi(p[2]);
            }
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config key '" + k + "': " + e.what());
        } catch (const std::out_of_range&) {
            throw std::invalid_argument("config key '" + k + "': value out of range");
        }
    }
    rc.problem.grid = GridSpec(n, b);
    rc.problem.validate();
    if (!(rc.eta > 0)) throw std::invalid_argument("eta must be positive");
    if (rc.occ1 < 0 || rc.occ2 < 0 || rc.occ1 >= rc.problem.m || rc.occ2 >= rc.problem.m)
        throw std::invalid_argument("occupied levels must lie in [0, m)");
    rc.echo = kv;
    rc.echo.erase("out");  // where results land does not change them
    return rc;
}

std::ofstream open_out(const RunConfig& rc, const std::string& name) {
    fs::create_directories(rc.out);
    std::ofstream f(fs::path(rc.out) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (fs::path(rc.out) / name).string());
    return f;
}

Solution run_solve(const RunConfig& rc, bool both_rows) {
    SolveOptions so;
    so.irreps = rc.irreps;
    so.both_rows = both_rows;
    so.stream.threads = rc.problem.threads;
    const ProblemConfig& cfg = rc.problem;
    if (rc.cache.empty()) return solve_problem(cfg, so);
    OscillatorBasis basis = make_basis(cfg.oscillator(), cfg.grid);
    auto pb = std::make_shared<const ProjectedBasis>(project_basis(cfg.m));
    const std::string key = operator_cache_key(cfg);
    fs::create_directories(rc.cache);
    const fs::path blob = fs::path(rc.cache) / ("ops_" + key.substr(0, 16) + ".bin");
    std::shared_ptr<const SubspaceOperators> ops;
    if (auto hit = load_operators(blob.string(), key)) {
        ops = std::make_shared<const SubspaceOperators>(std::move(*hit));
    } else {
        auto built = assemble_subspace_operators(cfg, basis, so.stream);
        save_operators(blob.string(), key, built);
        ops = std::make_shared<const SubspaceOperators>(std::move(built));
    }
    return solve_with_operators(cfg, std::move(basis), pb, ops, so);
}

using Clock = std::chrono::steady_clock;

void write_manifest(const RunConfig& rc, const Solution& s, const std::string& command, Clock::time_point t0) {
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(manifest_json(s, -1));
    nlohmann::ordered_json m;
    m["command"] = command;
    m["config"] = nlohmann::ordered_json(rc.echo);
    m["problem"] = j;
    auto f = open_out(rc, "manifest.json");
    f << m.dump(2) << "\n";
    // wall-clock figures change run to run, so they live beside the manifest
    nlohmann::ordered_json t;
    t["wall_clock_seconds"] = wall;
    t["basis_seconds"] = s.seconds_basis;
    t["projection_seconds"] = s.seconds_projection;
    t["assembly_seconds"] = s.seconds_assembly;
    t["solve_seconds"] = s.seconds_solve;
    auto g = open_out(rc, "timing.json");
    g << t.dump(2) << "\n";
}

std::string state_tag(const StateSelector& sel) {
    return sel.irrep + "_" + std::to_string(sel.row) + "_" + std::to_string(sel.r);
}

int cmd_levels(const RunConfig& rc, Clock::time_point t0) {
    Solution s = run_solve(rc, false);
    auto f = open_out(rc, "levels.csv");
    write_levels_csv(s, f);
    write_manifest(rc, s, "levels", t0);
    return 0;
}

int cmd_dos(const RunConfig& rc, Clock::time_point t0) {
    Solution s = run_solve(rc, true);
    const double left = -1.0, right = 12.0;
    for (Sector sec : {Sector::symmetric, Sector::antisymmetric}) {
        DeltaSpectrum g2 = dos_two_particle(s, sec);
        g2.eta = rc.eta;
        auto f = open_out(rc, "dos2_" + to_string(sec) + ".csv");
        write_peaks_csv(g2, f);
        auto fb = open_out(rc, "dos2_" + to_string(sec) + "_broadened.csv");
        write_broadened_csv(g2, left, right, 2601, fb);
        DeltaSpectrum g1 = dos_one_particle_interacting(s, rc.occ1, rc.occ2, sec);
        g1.eta = rc.eta;
        auto h = open_out(rc, "dos1_" + to_string(sec) + ".csv");
        write_peaks_csv(g1, h);
        auto hb = open_out(rc, "dos1_" + to_string(sec) + "_broadened.csv");
        write_broadened_csv(g1, left, right, 2601, hb);
    }
    NoninteractingDos nd = dos_noninteracting(s.basis, s.basis.m());
    nd.g1.eta = nd.g2.eta = rc.eta;
    auto a = open_out(rc, "dos1_noninteracting.csv");
    write_peaks_csv(nd.g1, a);
    auto b = open_out(rc, "dos2_noninteracting.csv");
    write_peaks_csv(nd.g2, b);
    write_manifest(rc, s, "dos", t0);
    return 0;
}

std::vector<StateSelector> selectors(const RunConfig& rc) {
    std::vector<StateSelector> v;
    for (auto& t : rc.states) v.push_back(parse_selector(t));
    if (v.empty()) v.push_back({"G11", 1, 1});
    return v;
}

int cmd_density(const RunConfig& rc, Clock::time_point t0) {
    std::vector<StateSelector> sel = selectors(rc);
    bool rows = std::any_of(sel.begin(), sel.end(), [](auto& s) { return s.row > 1; });
    Solution s = run_solve(rc, rows);
    for (auto& x : sel) {
        GridFunction psi = select_state(s, x);
        auto f = open_out(rc, "density_" + state_tag(x) + ".csv");
        write_density_csv(density_2d(psi, rc.problem.grid.n), rc.problem.grid, f);
    }
    write_manifest(rc, s, "density", t0);
    return 0;
}

int cmd_entanglement(const RunConfig& rc, Clock::time_point t0) {
    std::vector<StateSelector> sel = selectors(rc);
    bool rows = std::any_of(sel.begin(), sel.end(), [](auto& s) { return s.row > 1; });
    Solution s = run_solve(rc, rows);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto& x : sel) {
        double e = 0;
        GridFunction psi = select_state(s, x, &e);
        arr.push_back(nlohmann::ordered_json::parse(entanglement_json(x, e, reduce_density(psi, rc.problem.grid.n))));
    }
    auto f = open_out(rc, "entanglement.json");
    f << arr.dump(2) << "\n";
    write_manifest(rc, s, "entanglement", t0);
    return 0;
}

int cmd_convergence(const RunConfig& rc) {
    std::vector<int> ns;
    for (int n = rc.n_min; n <= rc.n_max; n += rc.n_step) ns.push_back(n);
    ConvergenceStudy st = run_convergence_study(rc.problem, rc.levels, ns);
    auto f = open_out(rc, "convergence.csv");
    f << "level,n,E_over_omega,exact,deficit\n";
    for (std::size_t i = 0; i < st.levels.size(); ++i)
        for (std::size_t j = 0; j < ns.size(); ++j)
            f << st.levels[i] << "," << ns[j] << "," << format_fixed(st.energies[i][j], 9) << ","
              << format_fixed(st.exact[i], 9) << "," << format_sig(st.exact[i] - st.energies[i][j], 15) << "\n";
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < st.levels.size(); ++i) {
        nlohmann::ordered_json e;
        e["level"] = st.levels[i];
        e["exponent"] = sig15(st.fits[i].slope);
        e["stderr"] = sig15(st.fits[i].stderr_);
        e["monotone"] = st.fits[i].monotone;
        e["all_positive"] = st.fits[i].all_positive;
        j.push_back(e);
    }
    auto g = open_out(rc, "convergence_fit.json");
    g << j.dump(2) << "\n";
    return 0;
}

int cmd_verify(const RunConfig& rc) {
    VerifyProfile prof;
    prof.gamma_p = rc.problem.gamma_p;
    auto checks = run_verify_suite(prof);
    return print_checks(checks, std::cout) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two particles in a square box: 4-D high-order finite differences with symmetry blocks"};
    app.require_subcommand(1);
    std::string config_file;
    std::map<std::string, std::string> flags;
    app.add_option("--config", config_file, "key=value config file");
    auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
    };
    flag("--n", "n", "interior grid points per axis");
    flag("--m", "m", "oscillator levels per axis");
    flag("--b", "b", "half width of the box");
    flag("--omega2-half", "omega2_half", "trap strength omega^2/2");
    flag("--c", "coulomb_c", "interaction strength");
    flag("--gamma-prime", "gamma_prime", "stencil parameter p/q");
    flag("--irreps", "irreps", "comma separated irrep labels");
    flag("--out", "out", "output directory");
    flag("--threads", "threads", "worker threads");
    flag("--memory-budget", "memory_budget_gib", "memory budget in GiB");
    flag("--eta", "eta", "Lorentzian broadening");
    flag("--occupied", "occupied", "occupied one-particle levels m1,m2");
    flag("--coincidence", "coincidence", "hard_core, half_cell or a factor");
    flag("--pencil", "pencil", "nonsymmetric or symmetrized");
    flag("--cache", "cache", "operator cache directory");
    flag("--states", "states", "state selectors irrep[:row[:r]], comma separated");
    flag("--levels", "levels", "Gamma11 ranks for the convergence study");
    flag("--n-range", "n_range", "min:max:step for the convergence study");
    app.fallthrough();

    const std::vector<std::string> cmds = {"levels", "dos", "density", "entanglement", "convergence", "verify"};
    for (auto& c : cmds) app.add_subcommand(c, c);

    std::string command = "?";
    try {
        app.parse(argc, argv);
        command = app.get_subcommands().front()->get_name();
        std::map<std::string, std::string> kv;
        if (!config_file.empty()) kv = read_config_file(config_file);
        for (auto& [k, v] : flags) kv[k] = v;
        RunConfig rc = build_config(kv);
        const auto t0 = Clock::now();
        int rcode = 0;
        if (command == "levels") rcode = cmd_levels(rc, t0);
        else if (command == "dos") rcode = cmd_dos(rc, t0);
        else if (command == "density") rcode = cmd_density(rc, t0);
        else if (command == "entanglement") rcode = cmd_entanglement(rc, t0);
        else if (command == "convergence") rcode = cmd_convergence(rc);
        else rcode = cmd_verify(rc);
        return rcode;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        nlohmann::ordered_json j;
        j["error"] = e.what();
        j["command"] = command;
        std::cerr << j.dump() << "\n";
        return 2;
    }
}
