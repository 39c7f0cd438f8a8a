#include "cogbid/auction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "cogbid/errors.hpp"

namespace cogbid::auction {

namespace {

// Assignments whose welfare differs by less than this (relative) are ties.
constexpr double kTieTolerance = 1e-10;

// Exhaustive search is used by the automatic path below these sizes.
constexpr std::size_t kEnumerateMaxSus = 6;
constexpr std::size_t kEnumerateMaxChannels = 4;

std::atomic<bool> g_warned_surplus{false};
std::atomic<bool> g_warned_negative{false};

void warn_once(std::atomic<bool>& flag, const char* msg) {
  if (!flag.exchange(true)) spdlog::warn("{} (further occurrences not logged)", msg);
}

// Effective weights restricted to available channels.
struct Reduced {
  std::size_t rows = 0;
  std::vector<std::size_t> channel;  // reduced column -> original channel
  std::vector<double> w;             // rows x channel.size()

  std::size_t cols() const { return channel.size(); }
  double at(std::size_t r, std::size_t c) const { return w[r * cols() + c]; }
};

Reduced reduce(const BidMatrix& bids) {
  Reduced red;
  red.rows = bids.num_sus();
  bool negative = false;
  for (std::size_t ch = 0; ch < bids.num_channels(); ++ch) {
    if (bids.available(ch)) red.channel.push_back(ch);
  }
  red.w.resize(red.rows * red.cols());
  for (std::size_t r = 0; r < red.rows; ++r) {
    for (std::size_t c = 0; c < red.cols(); ++c) {
      const double b = bids(r, red.channel[c]);
      if (b < 0.0) negative = true;
      red.w[r * red.cols() + c] = std::max(b, 0.0);
    }
  }
  if (negative) warn_once(g_warned_negative, "negative bids clamped to 0");
  return red;
}

// Max-weight assignment of every row of a dense rows x cols matrix (rows <= cols).
// Kuhn-Munkres with potentials; returns the column chosen for each row.
std::vector<std::size_t> hungarian_rows(const std::vector<double>& w, std::size_t n, std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = -w[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

// Best welfare of a maximum-cardinality matching between the given rows and
// columns, summed in row order.
double hungarian_value(const Reduced& red, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  const bool transpose = rows.size() > cols.size();
  const std::size_t n = transpose ? cols.size() : rows.size();
  const std::size_t m = transpose ? rows.size() : cols.size();
  std::vector<double> dense(n * m);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      dense[a * m + b] = transpose ? red.at(rows[b], cols[a]) : red.at(rows[a], cols[b]);
    }
  }
  const auto match = hungarian_rows(dense, n, m);
  std::vector<double> per_row(rows.size(), 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    if (transpose) {
      per_row[match[a]] = red.at(rows[match[a]], cols[a]);
    } else {
      per_row[a] = red.at(rows[a], cols[match[a]]);
    }
  }
  double sum = 0.0;
  for (double x : per_row) sum += x;
  return sum;
}

// Lexicographic enumeration over assignment vectors of the given rows.
// Returns the chosen reduced column per row (or npos) and the welfare.
struct Enumerator {
  const Reduced& red;
  const std::vector<std::size_t>& rows;
  std::vector<std::size_t> cols;
  std::size_t target;
  bool exact;  // oracle mode: strict '>' with no tie tolerance

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<std::size_t> current{}, best{};
  std::vector<bool> used{};
  double best_value = -1.0;
  bool found = false;

  void run() {
    current.assign(rows.size(), npos);
    used.assign(cols.size(), false);
    recurse(0, 0);
  }

  void recurse(std::size_t k, std::size_t assigned) {
    if (k == rows.size()) {
      if (assigned != target) return;
      double value = 0.0;
      for (std::size_t a = 0; a < rows.size(); ++a) {
        if (current[a] != npos) value += red.at(rows[a], cols[current[a]]);
      }
      const double margin = exact ? 0.0 : kTieTolerance * (1.0 + std::abs(best_value));
      if (!found || value > best_value + margin) {
        found = true;
        best_value = value;
        best = current;
      }
      return;
    }
    const std::size_t remaining_after = rows.size() - k - 1;
    if (remaining_after >= target - assigned) recurse(k + 1, assigned);
    if (assigned < target) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        if (used[c]) continue;
        used[c] = true;
        current[k] = c;
        recurse(k + 1, assigned + 1);
        current[k] = npos;
        used[c] = false;
      }
    }
  }
};

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

double enumeration_value(const Reduced& red, const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  Enumerator e{red, rows, cols, std::min(rows.size(), cols.size()), true};
  e.run();
  return e.best_value;
}

bool small_instance(std::size_t rows, std::size_t cols) {
  return rows <= kEnumerateMaxSus && cols <= kEnumerateMaxChannels;
}

double optimal_value(const Reduced& red, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
  return small_instance(rows.size(), cols.size()) ? enumeration_value(red, rows, cols)
                                                  : hungarian_value(red, rows, cols);
}

Allocation expand(const Reduced& red, const std::vector<std::size_t>& choice) {
  Allocation a;
  a.channel_of.assign(red.rows, kUnassigned);
  for (std::size_t r = 0; r < red.rows; ++r) {
    if (choice[r] != Enumerator::npos) a.channel_of[r] = static_cast<int>(red.channel[choice[r]]);
  }
  return a;
}

Allocation solve_by_enumeration(const Reduced& red, bool exact) {
  const auto rows = iota(red.rows);
  Enumerator e{red, rows, iota(red.cols()), std::min(red.rows, red.cols()), exact};
  e.run();
  return expand(red, e.best);
}

// Hungarian optimum, then fix SUs one at a time to the smallest option that
// still attains it.
Allocation solve_by_hungarian(const Reduced& red) {
  const std::size_t target = std::min(red.rows, red.cols());
  std::vector<std::size_t> free_rows = iota(red.rows);
  std::vector<std::size_t> free_cols = iota(red.cols());
  const double optimum = hungarian_value(red, free_rows, free_cols);
  const double slack = kTieTolerance * (1.0 + std::abs(optimum));

  std::vector<std::size_t> choice(red.rows, Enumerator::npos);
  double fixed_sum = 0.0;
  std::size_t assigned = 0;
  for (std::size_t r = 0; r < red.rows; ++r) {
    free_rows.erase(free_rows.begin());
    const std::size_t rows_left = free_rows.size();

    bool placed = false;
    {
      const std::size_t need = target - assigned;
      if (std::min(rows_left, free_cols.size()) == need) {
        const double v = fixed_sum + hungarian_value(red, free_rows, free_cols);
        if (v >= optimum - slack) placed = true;
      }
    }
    for (std::size_t k = 0; !placed && k < free_cols.size(); ++k) {
      const std::size_t c = free_cols[k];
      std::vector<std::size_t> cols_left = free_cols;
      cols_left.erase(cols_left.begin() + static_cast<std::ptrdiff_t>(k));
      const std::size_t need = target - assigned - 1;
      if (std::min(rows_left, cols_left.size()) != need) continue;
      const double v = fixed_sum + red.at(r, c) + hungarian_value(red, free_rows, cols_left);
      if (v >= optimum - slack) {
        choice[r] = c;
        fixed_sum += red.at(r, c);
        ++assigned;
        free_cols = std::move(cols_left);
        placed = true;
      }
    }
    if (!placed) {
      // Unreachable: the optimum itself is one of the candidates.
      throw std::logic_error("assignment fixing lost the optimum");
    }
  }
  return expand(red, choice);
}

}  // namespace

std::size_t BidMatrix::num_available() const {
  return static_cast<std::size_t>(std::count(available_.begin(), available_.end(), true));
}

void BidMatrix::set_row(std::size_t su, const std::vector<double>& bids) {
  if (bids.size() != channels_) throw DimensionError("bid vector length differs from channel count");
  std::copy(bids.begin(), bids.end(), values_.begin() + static_cast<std::ptrdiff_t>(su * channels_));
}

std::vector<std::vector<int>> Allocation::as_matrix(std::size_t num_channels) const {
  std::vector<std::vector<int>> z(channel_of.size(), std::vector<int>(num_channels, 0));
  for (std::size_t i = 0; i < channel_of.size(); ++i) {
    if (channel_of[i] != kUnassigned) z[i][static_cast<std::size_t>(channel_of[i])] = 1;
  }
  return z;
}

double effective_bid(const BidMatrix& bids, std::size_t su, std::size_t ch) {
  if (!bids.available(ch)) return 0.0;
  return std::max(bids(su, ch), 0.0);
}

double welfare_of(const BidMatrix& bids, const Allocation& allocation) {
  double sum = 0.0;
  for (std::size_t i = 0; i < allocation.channel_of.size(); ++i) {
    if (allocation.channel_of[i] != kUnassigned) {
      sum += effective_bid(bids, i, static_cast<std::size_t>(allocation.channel_of[i]));
    }
  }
  return sum;
}

Allocation solve_assignment(const BidMatrix& bids, SolverPath path) {
  const Reduced red = reduce(bids);
  if (red.cols() > red.rows) {
    warn_once(g_warned_surplus, "more available channels than SUs; some channels stay idle");
  }
  if (red.cols() == 0 || red.rows == 0) {
    return Allocation{std::vector<int>(bids.num_sus(), kUnassigned)};
  }
  if (path == SolverPath::automatic) {
    path = small_instance(red.rows, red.cols()) ? SolverPath::enumeration : SolverPath::hungarian;
  }
  return path == SolverPath::enumeration ? solve_by_enumeration(red, false) : solve_by_hungarian(red);
}

std::vector<double> compute_taxes(const BidMatrix& bids, const Allocation& allocation) {
  const Reduced red = reduce(bids);
  const std::size_t m = bids.num_sus();
  if (allocation.channel_of.size() != m) throw DimensionError("allocation size differs from SU count");
  std::vector<double> taxes(m, 0.0);
  const auto all_cols = iota(red.cols());
  for (std::size_t i = 0; i < m; ++i) {
    const int ch = allocation.channel_of[i];
    if (ch == kUnassigned) continue;
    double others = 0.0;
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      rows.push_back(k);
      if (allocation.channel_of[k] != kUnassigned) {
        others += effective_bid(bids, k, static_cast<std::size_t>(allocation.channel_of[k]));
      }
    }
    const double without_i = optimal_value(red, rows, all_cols);
    const double own = effective_bid(bids, i, static_cast<std::size_t>(ch));
    // Both bounds hold exactly in real arithmetic; clamp rounding residue.
    taxes[i] = std::clamp(others - without_i, -own, 0.0);
  }
  return taxes;
}

AuctionOutcome run_auction(const BidMatrix& bids) {
  AuctionOutcome out;
  out.allocation = solve_assignment(bids);
  out.taxes = compute_taxes(bids, out.allocation);
  out.welfare = welfare_of(bids, out.allocation);
  return out;
}

Allocation brute_force_assignment(const BidMatrix& bids) {
  if (bids.num_sus() > 8 || bids.num_available() > 6) {
    throw SizeError("brute_force_assignment: limited to 8 SUs and 6 available channels");
  }
  const Reduced red = reduce(bids);
  if (red.cols() == 0 || red.rows == 0) {
    return Allocation{std::vector<int>(bids.num_sus(), kUnassigned)};
  }
  return solve_by_enumeration(red, true);
}

}  // namespace cogbid::auction
