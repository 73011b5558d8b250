#include "n4d/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "n4d/util.hpp"

namespace n4d {

double DeltaSpectrum::total_weight() const {
    double s = 0.0;
    for (auto& p : peaks) s += p.weight;
    return s;
}

std::vector<double> DeltaSpectrum::broadened(const std::vector<double>& x) const {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (auto& p : peaks) {
            double d = x[i] - p.position;
            y[i] += p.weight * eta / M_PI / (d * d + eta * eta);
        }
    return y;
}

Sector sector_from_string(const std::string& s) {
    if (s == "symmetric") return Sector::symmetric;
    if (s == "antisymmetric") return Sector::antisymmetric;
    throw std::invalid_argument("unknown sector '" + s + "' (symmetric|antisymmetric)");
}

std::string to_string(Sector s) { return s == Sector::symmetric ? "symmetric" : "antisymmetric"; }

bool in_sector(const Irrep& ir, Sector s) { return ir.antisymmetric() == (s == Sector::antisymmetric); }

namespace {

void check_normalized(const GridFunction& psi, std::size_t size, const char* who) {
    if (psi.size() != size) throw std::invalid_argument(std::string(who) + ": state has the wrong size");
    double s = 0.0;
    for (double v : psi) s += v * v;
    if (std::fabs(s - 1.0) > 1e-8) {
        std::ostringstream os;
        os << who << ": state is not normalized (sum psi^2 = " << s << ")";
        throw std::invalid_argument(os.str());
    }
}

std::vector<Peak> merge_peaks(std::vector<Peak> p, double tol) {
    std::sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.position < b.position; });
    std::vector<Peak> out;
    for (auto& x : p) {
        if (!out.empty() && x.position - out.back().position <= tol) out.back().weight += x.weight;
        else out.push_back(x);
    }
    return out;
}

}  // namespace

Eigen::MatrixXd density_2d(const GridFunction& psi, int n) {
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    check_normalized(psi, n2 * n2, "density_2d");
    Eigen::Map<const Eigen::MatrixXd> P(psi.data(), n2, n2);
    Eigen::VectorXd d = P.rowwise().squaredNorm();
    return Eigen::Map<Eigen::MatrixXd>(d.data(), n, n);
}

NoninteractingDos dos_noninteracting(const OscillatorBasis& basis, int level_cap) {
    if (level_cap < 1 || level_cap > basis.m()) throw std::invalid_argument("dos_noninteracting: bad level cap");
    NoninteractingDos d;
    std::vector<Peak> g1;
    for (int a = 0; a < level_cap; ++a)
        for (int b = 0; b < level_cap; ++b) g1.push_back({static_cast<double>(basis.nu[a] + basis.nu[b] + 1.0L), 1.0});
    std::vector<Peak> g2;
    for (auto& x : g1)
        for (auto& y : g1) g2.push_back({x.position + y.position, x.weight * y.weight});
    d.g1.peaks = merge_peaks(g1, 1e-9);
    d.g2.peaks = merge_peaks(g2, 1e-9);
    return d;
}

DeltaSpectrum dos_two_particle(const Solution& s, Sector sector) {
    const auto& irr = the_irreps();
    std::vector<Peak> p;
    for (auto& b : s.blocks) {
        if (b.row != 0 || !in_sector(irr[b.irrep], sector)) continue;
        for (double e : b.energies) p.push_back({e / s.omega(), double(irr[b.irrep].d)});
    }
    DeltaSpectrum d;
    d.peaks = merge_peaks(p, 0.0);
    return d;
}

Eigen::MatrixXd s_matrix(const OscillatorBasis& basis, const GridFunction& psi, int m1, int m2) {
    const int m = basis.m();
    if (m1 < 0 || m2 < 0 || m1 >= m || m2 >= m) throw std::invalid_argument("s_matrix: occupied index out of range");
    Eigen::VectorXd all = contract_labels(basis, psi);
    Eigen::MatrixXd S(m, m);
    LabelSpace ls{m};
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) S(a, b) = all(ls.index({a, b, m1, m2}));
    return S;
}

double one_particle_weight(const OscillatorBasis& basis, const GridFunction& psi, int m1, int m2, Sector sector) {
    Eigen::MatrixXd S = s_matrix(basis, psi, m1, m2);
    const double c = sector == Sector::antisymmetric ? -std::sqrt(2.0) : 1.0;
    // amplitude(p, i) = sqrt2 phi S phi^T - / + c phi_m1 phi_m2 S_m1m2
    Eigen::MatrixXd amp = std::sqrt(2.0) * basis.phi * S * basis.phi.transpose();
    amp += c * S(m1, m2) * basis.phi.col(m1) * basis.phi.col(m2).transpose();
    return amp.squaredNorm();
}

DeltaSpectrum dos_one_particle_interacting(const Solution& s, int m1, int m2, Sector sector, int max_states) {
    const auto& irr = the_irreps();
    const int m = s.basis.m();
    if (m1 < 0 || m2 < 0 || m1 >= m || m2 >= m)
        throw std::invalid_argument("dos_one_particle_interacting: occupied index out of range");
    const double eps_m = static_cast<double>(s.basis.nu[m1] + s.basis.nu[m2] + 1.0L);
    std::vector<Peak> p;
    for (auto& b : s.blocks) {
        if (b.row != 0 || !in_sector(irr[b.irrep], sector)) continue;
        const int d = irr[b.irrep].d;
        const int count = max_states < 0 ? static_cast<int>(b.energies.size())
                                         : std::min<int>(max_states, static_cast<int>(b.energies.size()));
        for (int r = 0; r < count; ++r) {
            double w = 0.0;
            for (int j = 0; j < d; ++j) {
                const BlockSolution* bj = s.find(b.irrep, j);
                if (!bj)
                    throw std::invalid_argument("dos_one_particle_interacting: row " + std::to_string(j + 1) + " of " +
                                                irr[b.irrep].label + " not solved");
                w += one_particle_weight(s.basis, block_state(s, *bj, r), m1, m2, sector);
            }
            p.push_back({b.energies[r] / s.omega() - eps_m, w});
        }
    }
    DeltaSpectrum out;
    out.peaks = merge_peaks(p, 0.0);
    return out;
}

ReducedDensity reduce_density(const GridFunction& psi, int n, bool keep_first) {
    const std::size_t n2 = static_cast<std::size_t>(n) * n;
    check_normalized(psi, n2 * n2, "reduce_density");
    Eigen::Map<const Eigen::MatrixXd> P(psi.data(), n2, n2);
    ReducedDensity rd;
    rd.rho = keep_first ? Eigen::MatrixXd(P * P.transpose()) : Eigen::MatrixXd(P.transpose() * P);
    rd.trace = rd.rho.trace();
    if (std::fabs(rd.trace - 1.0) > 1e-8) throw std::invalid_argument("reduce_density: trace deviates from 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rd.rho, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    rd.min_eigenvalue = ev(0);
    for (Eigen::Index j = ev.size() - 1; j >= 0; --j) rd.schmidt.push_back(ev(j) < 1e-14 ? 0.0 : ev(j));
    for (double l : rd.schmidt) {
        if (l > 0) rd.entropy -= l * std::log(l);
        rd.purity += l * l;
        if (l > 1e-6) ++rd.schmidt_count;
    }
    return rd;
}

StateSelector parse_selector(const std::string& s) {
    StateSelector sel;
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.empty() || parts.size() > 3) throw std::invalid_argument("bad state selector '" + s + "'");
    sel.irrep = parts[0];
    try {
        if (parts.size() > 1) sel.row = std::stoi(parts[1]);
        if (parts.size() > 2) sel.r = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad state selector '" + s + "' (expected irrep[:row[:r]])");
    }
    return sel;
}

GridFunction select_state(const Solution& s, const StateSelector& sel, double* energy) {
    const auto& irr = the_irreps();
    const int q = irr.index_of(sel.irrep);
    const BlockSolution* b = q >= 0 ? s.find(q, sel.row - 1) : nullptr;
    if (!b || sel.r < 1 || sel.r > static_cast<int>(b->energies.size())) {
        std::ostringstream os;
        os << "unknown state " << sel.irrep << ":" << sel.row << ":" << sel.r << "; available:";
        for (auto& x : s.blocks) os << " " << irr[x.irrep].label << ":" << x.row + 1 << ":1.." << x.energies.size();
        throw std::invalid_argument(os.str());
    }
    if (energy) *energy = b->energies[sel.r - 1] / s.omega();
    return block_state(s, *b, sel.r - 1);
}

void write_density_csv(const Eigen::MatrixXd& d, const GridSpec& g, std::ostream& os) {
    os << "p,i,x,y,density\n";
    for (int i = 0; i < d.cols(); ++i)
        for (int p = 0; p < d.rows(); ++p)
            os << p + 1 << "," << i + 1 << "," << format_fixed(g.x(p + 1), 6) << "," << format_fixed(g.x(i + 1), 6) << ","
               << format_sig(d(p, i), 15) << "\n";
}

void write_peaks_csv(const DeltaSpectrum& d, std::ostream& os) {
    os << "position,weight\n";
    for (auto& p : d.peaks) os << format_fixed(p.position, 6) << "," << format_sig(p.weight, 15) << "\n";
}

void write_broadened_csv(const DeltaSpectrum& d, double x0, double x1, int samples, std::ostream& os) {
    std::vector<double> x(samples);
    for (int i = 0; i < samples; ++i) x[i] = samples > 1 ? x0 + (x1 - x0) * i / (samples - 1) : x0;
    auto y = d.broadened(x);
    os << "x,dos\n";
    for (int i = 0; i < samples; ++i) os << format_fixed(x[i], 6) << "," << format_sig(y[i], 15) << "\n";
}

std::string entanglement_json(const StateSelector& sel, double e_over_omega, const ReducedDensity& rd) {
    nlohmann::ordered_json j;
    j["irrep"] = sel.irrep;
    j["row"] = sel.row;
    j["r"] = sel.r;
    j["E"] = sig15(e_over_omega);
    j["purity"] = sig15(rd.purity);
    j["schmidt_count"] = rd.schmidt_count;
    j["entropy"] = sig15(rd.entropy);
    auto arr = nlohmann::ordered_json::array();
    for (double l : rd.schmidt)
        if (l > 1e-12) arr.push_back(sig15(l));
    j["schmidt_values"] = arr;
    return j.dump(2) + "\n";
}

}  // namespace n4d
