#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace jointdep {

/// Ordered, named partition of the data columns into variable groups.
/// Column indices are stored 0-based; the textual syntax is 1-based.
class GroupSpec {
  public:
    struct Range {
        std::string name;
        int first = 0;  // inclusive, 0-based
        int last = 0;   // inclusive, 0-based
    };

    GroupSpec() = default;
    explicit GroupSpec(std::vector<Range> ranges);

    /// Parses "x:1-3,y:4,z:5-8" (1-based inclusive columns).
    static GroupSpec parse(const std::string& text);

    /// Builds d univariate groups with the given names (one column each).
    static GroupSpec univariate(const std::vector<std::string>& names);

    int group_count() const { return static_cast<int>(ranges_.size()); }
    const std::string& name(int g) const { return ranges_[g].name; }
    int dim(int g) const { return ranges_[g].last - ranges_[g].first + 1; }
    std::pair<int, int> columns(int g) const { return {ranges_[g].first, ranges_[g].last}; }
    int total_columns() const { return total_columns_; }
    const std::vector<Range>& ranges() const { return ranges_; }

    /// Index of the named group, -1 if absent.
    int index_of(const std::string& name) const;

  private:
    std::vector<Range> ranges_;
    int total_columns_ = 0;
};

/// n observations of d variable groups, stored as one n x p0 matrix.
/// Immutable after construction; shared freely across worker threads.
struct Dataset {
    Eigen::MatrixXd values;  // n x p0, all entries finite
    GroupSpec groups;

    int n() const { return static_cast<int>(values.rows()); }
    int d() const { return groups.group_count(); }

    /// The n x p_g block holding group g's coordinates.
    Eigen::Ref<const Eigen::MatrixXd> group_block(int g) const {
        const auto [first, last] = groups.columns(g);
        return values.middleCols(first, last - first + 1);
    }
};

enum class Estimator { kVStat, kUCentered };
enum class Variant { kPlain, kScaled, kRank };

/// Configuration of the dependence statistic used in tests.
struct MetricConfig {
    double c = 1.0;
    Estimator estimator = Estimator::kUCentered;
    Variant variant = Variant::kPlain;
};

/// Outcome of a bootstrap-calibrated test.
struct TestResult {
    double statistic = 0.0;           // observed n * squared metric
    std::vector<double> replicates;   // B bootstrap statistics
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;              // statistic > empirical (1-alpha) quantile of replicates
    std::uint64_t seed = 0;
    int B = 0;
};

/// Collects human-readable descriptions of every violated Dataset invariant.
std::vector<std::string> validation_errors(const Dataset& ds, bool require_multiple_groups);

/// Throws std::invalid_argument listing all violations; no-op when valid.
void validate(const Dataset& ds, bool require_multiple_groups = true);

/// Reads a headered CSV and binds its columns per the group spec.
Dataset load_csv(const std::string& path, const GroupSpec& groups);

/// Writes the dataset back to CSV with round-trip-safe number formatting.
void write_csv(const Dataset& ds, const std::string& path);

/// Round-trip-safe decimal rendering of a double (shortest form of %.17g).
std::string format_double(double v);

}  // namespace jointdep
