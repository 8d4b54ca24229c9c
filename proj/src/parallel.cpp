#include "specdim/parallel.hpp"

#include <atomic>
#include <cmath>

namespace specdim::par {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }
int max_threads() { return g_max_threads.load(); }

double tree_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 4) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = n / 2;
    return tree_sum(v.first(h)) + tree_sum(v.subspan(h));
}

double compensated_sum(std::span<const double> v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

void tree_combine_rows(const std::vector<std::vector<double>>& rows, std::vector<double>& out) {
    if (rows.empty()) {
        out.clear();
        return;
    }
    const std::size_t m = rows[0].size();
    out.assign(m, 0.0);
    std::vector<double> tmp(rows.size());
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < rows.size(); ++r) tmp[r] = rows[r][j];
        out[j] = tree_sum(tmp);
    }
}

}  // namespace specdim::par
