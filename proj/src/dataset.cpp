#include "jointdep/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace jointdep {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

int parse_positive_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || value < 1) {
        throw std::invalid_argument("group spec: bad " + what + " '" + text + "'");
    }
    return value;
}

}  // namespace

GroupSpec::GroupSpec(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
    if (ranges_.empty()) throw std::invalid_argument("group spec: no groups given");
    int max_col = -1;
    for (const auto& r : ranges_) {
        if (r.name.empty()) throw std::invalid_argument("group spec: empty group name");
        if (r.first < 0 || r.last < r.first) throw std::invalid_argument("group spec: bad column range for '" + r.name + "'");
        max_col = std::max(max_col, r.last);
    }
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        for (std::size_t j = i + 1; j < ranges_.size(); ++j) {
            if (ranges_[i].name == ranges_[j].name) {
                throw std::invalid_argument("group spec: duplicate group name '" + ranges_[i].name + "'");
            }
            const bool disjoint = ranges_[i].last < ranges_[j].first || ranges_[j].last < ranges_[i].first;
            if (!disjoint) {
                throw std::invalid_argument("group spec: groups '" + ranges_[i].name + "' and '" + ranges_[j].name +
                                            "' overlap");
            }
        }
    }
    // Contiguous cover of {0..max_col}.
    std::vector<char> covered(static_cast<std::size_t>(max_col) + 1, 0);
    for (const auto& r : ranges_) {
        for (int c = r.first; c <= r.last; ++c) covered[static_cast<std::size_t>(c)] = 1;
    }
    for (int c = 0; c <= max_col; ++c) {
        if (!covered[static_cast<std::size_t>(c)]) {
            throw std::invalid_argument("group spec: column " + std::to_string(c + 1) + " not assigned to any group");
        }
    }
    total_columns_ = max_col + 1;
}

GroupSpec GroupSpec::parse(const std::string& text) {
    std::vector<Range> ranges;
    for (const std::string& part : split(text, ',')) {
        const std::string entry = trim(part);
        if (entry.empty()) throw std::invalid_argument("group spec: empty entry in '" + text + "'");
        const std::size_t colon = entry.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("group spec: missing ':' in '" + entry + "'");
        Range r;
        r.name = trim(entry.substr(0, colon));
        const std::string cols = trim(entry.substr(colon + 1));
        const std::size_t dash = cols.find('-');
        if (dash == std::string::npos) {
            r.first = r.last = parse_positive_int(cols, "column") - 1;
        } else {
            r.first = parse_positive_int(cols.substr(0, dash), "column") - 1;
            r.last = parse_positive_int(cols.substr(dash + 1), "column") - 1;
        }
        ranges.push_back(std::move(r));
    }
    return GroupSpec(std::move(ranges));
}

GroupSpec GroupSpec::univariate(const std::vector<std::string>& names) {
    std::vector<Range> ranges;
    ranges.reserve(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        ranges.push_back({names[i], static_cast<int>(i), static_cast<int>(i)});
    }
    return GroupSpec(std::move(ranges));
}

int GroupSpec::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < ranges_.size(); ++i) {
        if (ranges_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> validation_errors(const Dataset& ds, bool require_multiple_groups) {
    std::vector<std::string> errors;
    if (ds.values.rows() < 2) errors.push_back("dataset: need at least 2 observations");
    if (ds.groups.group_count() == 0) {
        errors.push_back("dataset: no groups defined");
        return errors;
    }
    if (require_multiple_groups && ds.groups.group_count() < 2) {
        errors.push_back("dataset: d >= 2 required (got a single group; only distance variance is defined)");
    }
    if (ds.groups.total_columns() != ds.values.cols()) {
        errors.push_back("dataset: group spec covers " + std::to_string(ds.groups.total_columns()) +
                         " columns but data has " + std::to_string(ds.values.cols()));
    }
    if (!ds.values.allFinite()) {
        for (int j = 0; j < ds.values.cols(); ++j) {
            for (int i = 0; i < ds.values.rows(); ++i) {
                if (!std::isfinite(ds.values(i, j))) {
                    errors.push_back("dataset: non-finite value at row " + std::to_string(i + 1) + ", column " +
                                     std::to_string(j + 1));
                }
            }
        }
    }
    return errors;
}

void validate(const Dataset& ds, bool require_multiple_groups) {
    const auto errors = validation_errors(ds, require_multiple_groups);
    if (errors.empty()) return;
    std::string msg;
    for (const auto& e : errors) {
        if (!msg.empty()) msg += "; ";
        msg += e;
    }
    throw std::invalid_argument(msg);
}

Dataset load_csv(const std::string& path, const GroupSpec& groups) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty (header row required)");

    std::vector<std::vector<double>> rows;
    int ncols = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (ncols == -1) {
            ncols = static_cast<int>(cells.size());
        } else if (static_cast<int>(cells.size()) != ncols) {
            throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(ncols) + " cells, found " + std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
                throw std::runtime_error("'" + path + "' line " + std::to_string(lineno) + ", column " +
                                         std::to_string(c + 1) + ": cannot parse '" + cell + "' as a finite number");
            }
            row[c] = value;
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("'" + path + "' has a header but no data rows");
    if (groups.total_columns() > ncols) {
        throw std::invalid_argument("group spec needs " + std::to_string(groups.total_columns()) +
                                    " columns but '" + path + "' has " + std::to_string(ncols));
    }
    if (groups.total_columns() < ncols) {
        throw std::invalid_argument("group spec covers only " + std::to_string(groups.total_columns()) + " of " +
                                    std::to_string(ncols) + " columns in '" + path + "'");
    }

    Dataset ds;
    ds.groups = groups;
    ds.values.resize(static_cast<Eigen::Index>(rows.size()), ncols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < ncols; ++j) ds.values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
    return ds;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    for (int g = 0; g < ds.groups.group_count(); ++g) {
        const auto [first, last] = ds.groups.columns(g);
        for (int c = first; c <= last; ++c) {
            if (c > 0) out << ',';
            out << ds.groups.name(g);
            if (last > first) out << '_' << (c - first + 1);
        }
    }
    out << '\n';
    for (int i = 0; i < ds.values.rows(); ++i) {
        for (int j = 0; j < ds.values.cols(); ++j) {
            if (j > 0) out << ',';
            out << format_double(ds.values(i, j));
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace jointdep
