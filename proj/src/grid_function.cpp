#include "stark/grid_function.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stark {

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc())
        throw std::invalid_argument("parse_double: cannot parse '" + s + "'");
    return v;
}

GridFunction::GridFunction(std::vector<double> grid, std::vector<double> values,
                           Interp interp, Domain domain)
    : grid_(std::move(grid)), values_(std::move(values)), interp_(interp), domain_(domain) {
    if (grid_.empty()) throw std::invalid_argument("GridFunction: empty grid");
    if (grid_.size() != values_.size())
        throw std::invalid_argument("GridFunction: grid/value length mismatch");
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
        if (!(grid_[i] < grid_[i + 1]))
            throw std::invalid_argument("GridFunction: grid must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
}

double GridFunction::operator()(double x) const {
    if (!(x >= grid_.front() && x <= grid_.back()))
        throw std::domain_error("GridFunction: evaluation outside grid range");
    auto it = std::lower_bound(grid_.begin(), grid_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    if (i < grid_.size() && grid_[i] == x) return values_[i];
    // x lies strictly between grid_[i-1] and grid_[i]
    const double x0 = grid_[i - 1], x1 = grid_[i];
    if (interp_ == Interp::ConstantLeft) return values_[i - 1];
    const double t = (x - x0) / (x1 - x0);
    return values_[i - 1] + t * (values_[i] - values_[i - 1]);
}

static const char* interp_name(Interp i) {
    return i == Interp::Linear ? "linear" : "constant-left";
}

void GridFunction::save(std::ostream& os, double alpha) const {
    os << "# grid-function frame=" << (domain_ == Domain::Xi ? "xi" : "x")
       << " alpha=" << format_double(alpha) << " interp=" << interp_name(interp_)
       << " n=" << grid_.size() << "\n";
    for (std::size_t i = 0; i < grid_.size(); ++i)
        os << format_double(grid_[i]) << " " << format_double(values_[i]) << "\n";
}

void GridFunction::save_file(const std::string& path, double alpha) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("GridFunction: cannot open " + path);
    save(os, alpha);
}

std::pair<GridFunction, double> GridFunction::load(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# grid-function", 0) != 0)
        throw std::runtime_error("GridFunction: missing header");
    Domain domain = header.find("frame=xi") != std::string::npos ? Domain::Xi : Domain::X;
    Interp interp = header.find("interp=constant-left") != std::string::npos
                        ? Interp::ConstantLeft
                        : Interp::Linear;
    double alpha = 1.0;
    if (auto pos = header.find("alpha="); pos != std::string::npos) {
        std::string rest = header.substr(pos + 6);
        alpha = parse_double(rest.substr(0, rest.find(' ')));
    }
    std::vector<double> xs, vs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b;
        ls >> a >> b;
        xs.push_back(parse_double(a));
        vs.push_back(parse_double(b));
    }
    return {GridFunction(std::move(xs), std::move(vs), interp, domain), alpha};
}

std::pair<GridFunction, double> GridFunction::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("GridFunction: cannot open " + path);
    return load(is);
}

void GridBuilder::add(double x, double v) {
    if (!xs_.empty() && !(x > xs_.back())) {
        // nudge forward by one ulp-scale increment; used at paired jump nodes
        double eps = std::abs(xs_.back()) * 1e-15 + 1e-300;
        x = xs_.back() + eps;
        if (!(x > xs_.back())) return;  // cannot separate, drop the sample
    }
    xs_.push_back(x);
    vs_.push_back(v);
}

GridFunction GridBuilder::take(Interp interp, Domain domain) {
    return GridFunction(std::move(xs_), std::move(vs_), interp, domain);
}

GridFunction extend_with_zeros(const GridFunction& f, double lo, double hi) {
    if (lo > f.front() || hi < f.back())
        throw std::invalid_argument("extend_with_zeros: target range must contain the support");
    constexpr double gap = 1e-12;
    std::vector<double> xs, vs;
    if (lo < f.front()) {
        xs.push_back(lo);
        vs.push_back(0.0);
        if (f.value(0) != 0.0) {
            xs.push_back(f.front() * (1.0 - gap));
            vs.push_back(0.0);
        }
    }
    xs.insert(xs.end(), f.grid().begin(), f.grid().end());
    vs.insert(vs.end(), f.values().begin(), f.values().end());
    if (hi > f.back()) {
        if (f.value(f.size() - 1) != 0.0) {
            xs.push_back(f.back() * (1.0 + gap));
            vs.push_back(0.0);
        }
        xs.push_back(hi);
        vs.push_back(0.0);
    }
    return GridFunction(std::move(xs), std::move(vs), f.interp(), f.domain());
}

}  // namespace stark
