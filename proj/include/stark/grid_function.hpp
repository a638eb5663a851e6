#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace stark {

enum class Interp { Linear, ConstantLeft };
enum class Domain { X, Xi };

/// A sampled real function on a strictly increasing nonuniform grid.
///
/// Evaluation is defined on [front(), back()] only; hitting a node returns the
/// stored value exactly. ConstantLeft extends each node's value up to (but not
/// including) the next node, which is the natural carrier for sign-switching
/// potentials sampled with paired jump nodes.
class GridFunction {
public:
    GridFunction(std::vector<double> grid, std::vector<double> values,
                 Interp interp, Domain domain);

    double operator()(double x) const;

    std::size_t size() const { return grid_.size(); }
    double node(std::size_t i) const { return grid_[i]; }
    double value(std::size_t i) const { return values_[i]; }
    double front() const { return grid_.front(); }
    double back() const { return grid_.back(); }
    Interp interp() const { return interp_; }
    Domain domain() const { return domain_; }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }

    /// Returns a copy with values transformed node-by-node.
    template <class F>
    GridFunction map_values(F&& f) const {
        std::vector<double> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid_[i], v[i]);
        return GridFunction(grid_, v, interp_, domain_);
    }

    void save(std::ostream& os, double alpha) const;
    void save_file(const std::string& path, double alpha) const;
    static std::pair<GridFunction, double> load(std::istream& is);
    static std::pair<GridFunction, double> load_file(const std::string& path);

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    Interp interp_;
    Domain domain_;
};

/// Incremental builder that enforces strict monotonicity of the abscissae.
class GridBuilder {
public:
    void add(double x, double v);
    bool empty() const { return xs_.empty(); }
    double last_x() const { return xs_.back(); }
    std::size_t size() const { return xs_.size(); }
    GridFunction take(Interp interp, Domain domain);

private:
    std::vector<double> xs_, vs_;
};

/// Extends a sampled function by zero outside its support. When an endpoint
/// value is nonzero a paired jump node keeps the extension honest.
GridFunction extend_with_zeros(const GridFunction& f, double lo, double hi);

/// Locale-independent shortest round-trip formatting used by all writers.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace stark
