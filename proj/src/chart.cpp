#include "bcontact/chart.hpp"

#include <algorithm>
#include <set>

namespace bct {

Chart::Chart(std::vector<std::string> coords, std::vector<Interval> box,
             std::optional<std::string> z_name, int m)
    : coords_(std::move(coords)), box_(std::move(box)), m_(m) {
    if (coords_.empty()) throw ChartError("chart needs at least one coordinate");
    if (box_.size() != coords_.size())
        throw ChartError("chart box size does not match coordinate count");
    std::set<std::string> seen(coords_.begin(), coords_.end());
    if (seen.size() != coords_.size()) throw ChartError("duplicate coordinate names");
    for (const auto& iv : box_)
        if (!(iv.lo < iv.hi)) throw ChartError("empty interval in chart box");
    if (z_name) {
        z_index_ = index_of(*z_name);
        if (z_index_ < 0) throw ChartError("defining coordinate '" + *z_name + "' not in chart");
        if (m_ < 1) throw ChartError("singularity order m must be >= 1");
        const Interval& zi = box_[z_index_];
        if (!(zi.lo < 0.0 && 0.0 < zi.hi))
            throw ChartError("z-interval must contain 0 in its interior");
    }
}

const std::string& Chart::z_name() const {
    if (!singular()) throw ChartError("smooth chart has no defining coordinate");
    return coords_[z_index_];
}

int Chart::index_of(const std::string& name) const {
    auto it = std::find(coords_.begin(), coords_.end(), name);
    return it == coords_.end() ? -1 : static_cast<int>(it - coords_.begin());
}

Chart Chart::smoothed() const { return Chart(coords_, box_); }

Chart Chart::extended(const std::string& name, Interval iv) const {
    if (has_coord(name)) throw ChartError("coordinate '" + name + "' already present");
    auto c = coords_;
    auto b = box_;
    c.push_back(name);
    b.push_back(iv);
    return singular() ? Chart(c, b, z_name(), m_) : Chart(c, b);
}

bool Chart::same_as(const Chart& o) const {
    if (coords_ != o.coords_ || z_index_ != o.z_index_ || m_ != o.m_) return false;
    for (size_t i = 0; i < box_.size(); ++i)
        if (box_[i].lo != o.box_[i].lo || box_[i].hi != o.box_[i].hi) return false;
    return true;
}

double halton(unsigned long long index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

namespace {

const int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Map u in [0,1) onto [lo,hi] minus the open margin band around 0.
double off_z_map(double u, double lo, double hi, double margin) {
    double gap = margin * (hi - lo);
    double left = -gap - lo;   // length of [lo, -gap]
    double right = hi - gap;   // length of [gap, hi]
    if (left <= 0.0) return gap + u * right;
    if (right <= 0.0) return lo + u * left;
    double total = left + right;
    double s = u * total;
    return s < left ? lo + s : gap + (s - left);
}

} // namespace

std::vector<Point> sample_points(const Chart& chart, const GridCfg& cfg, Regime regime, int count) {
    if (count < 0) throw ChartError("negative sample count");
    if (!chart.singular()) regime = Regime::Plain;
    std::vector<Point> pts;
    pts.reserve(count);
    const int dim = chart.dim();
    if (dim > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
        throw ChartError("chart dimension too large for the sampler");
    for (int i = 0; i < count; ++i) {
        unsigned long long idx = static_cast<unsigned long long>(cfg.seed) + 1 + i;
        Point p;
        for (int d = 0; d < dim; ++d) {
            double u = halton(idx, kPrimes[d]);
            const Interval& iv = chart.interval(d);
            double v;
            if (chart.singular() && d == chart.z_index()) {
                if (regime == Regime::OnZ) v = 0.0;
                else if (regime == Regime::OffZ) v = off_z_map(u, iv.lo, iv.hi, cfg.z_margin);
                else v = iv.lo + u * iv.width();
            } else {
                v = iv.lo + u * iv.width();
            }
            p[chart.coords()[d]] = v;
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

} // namespace bct
