#ifndef BCONTACT_CHART_HPP
#define BCONTACT_CHART_HPP

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bct {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChartError : Error {
    using Error::Error;
};

/// A point is a coordinate-name -> value assignment.
using Point = std::map<std::string, double>;

struct Interval {
    double lo = -1.0, hi = 1.0;
    double width() const { return hi - lo; }
};

/// Coordinate chart: ordered coordinate names with a domain box and,
/// on singular charts, a distinguished defining coordinate z of order m.
/// The critical slice Z = {z = 0} must lie in the interior of the z-interval.
class Chart {
public:
    Chart() = default;
    Chart(std::vector<std::string> coords, std::vector<Interval> box,
          std::optional<std::string> z_name = std::nullopt, int m = 1);

    int dim() const { return static_cast<int>(coords_.size()); }
    const std::vector<std::string>& coords() const { return coords_; }
    const std::vector<Interval>& box() const { return box_; }
    const Interval& interval(int i) const { return box_.at(i); }

    bool singular() const { return z_index_ >= 0; }
    int z_index() const { return z_index_; }
    int order() const { return m_; }
    const std::string& z_name() const;

    int index_of(const std::string& name) const;  // -1 if absent
    bool has_coord(const std::string& name) const { return index_of(name) >= 0; }

    /// Same coords/box with the singular data removed.
    Chart smoothed() const;
    /// Same chart extended by a fresh smooth coordinate (appended last).
    Chart extended(const std::string& name, Interval iv) const;

    bool same_as(const Chart& o) const;

private:
    std::vector<std::string> coords_;
    std::vector<Interval> box_;
    int z_index_ = -1;
    int m_ = 1;
};

/// Grid configuration shared by every grid-verified operation.
struct GridCfg {
    int n_off = 200;        // off-Z sample count
    int n_on = 100;         // on-Z sample count
    double tol = 1e-8;
    unsigned seed = 42;
    double z_margin = 1e-3; // fraction of the z-interval width kept clear of Z
};

enum class Regime { OffZ, OnZ, Plain };

/// Deterministic low-discrepancy samples of the chart box.
/// OffZ keeps |z| >= z_margin * width(z); OnZ pins z = 0; Plain ignores
/// the singular structure. Smooth charts always sample Plain.
std::vector<Point> sample_points(const Chart& chart, const GridCfg& cfg, Regime regime, int count);

/// Halton radical inverse in the given base (1-indexed sequence).
double halton(unsigned long long index, int base);

} // namespace bct

#endif
