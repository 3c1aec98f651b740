#include "torva/formal.hpp"

#include <mutex>
#include <sstream>
#include <unordered_map>

namespace torva {

namespace {
std::mutex g_var_mutex;
std::vector<std::string> g_var_names;
std::unordered_map<std::string, int> g_var_ids;
}  // namespace

int var_id(const std::string& name) {
    std::lock_guard<std::mutex> lock(g_var_mutex);
    auto it = g_var_ids.find(name);
    if (it != g_var_ids.end()) return it->second;
    int id = static_cast<int>(g_var_names.size());
    g_var_names.push_back(name);
    g_var_ids.emplace(name, id);
    return id;
}

const std::string& var_name(int id) {
    std::lock_guard<std::mutex> lock(g_var_mutex);
    return g_var_names.at(static_cast<size_t>(id));
}

CycSeries binomial_series(long scale, int varA, int varB, const Rat& alpha, int signB,
                          const Window& win) {
    CycSeries one = constant_series(scale, Cyc(1));
    return mul_binom(one, varA, varB, alpha, signB, win);
}

CycSeries delta_kernel_series(long scale, int varC, int varA, int varB, const Rat& alpha,
                              int signB, const Window& win) {
    CycSeries one = constant_series(scale, Cyc(1));
    return mul_delta_kernel(one, varC, varA, varB, alpha, signB, false, win);
}

CycSeries ratio_delta_series(long scale, int varX, int varY, const Rat& alpha,
                             const Window& win) {
    // sum_n varX^{-n-1-alpha} varY^{n+alpha}
    Rat alphaS = alpha * scale;
    if (denominator(alphaS) != 1)
        throw std::invalid_argument("ratio_delta_series: alpha incompatible with scale");
    long aS = static_cast<long>(numerator(alphaS));
    auto wx = win.find(varX);
    auto wy = win.find(varY);
    if (wx == win.end() || wy == win.end() || wx->second.lo == kNegInf ||
        wx->second.hi == kPosInf)
        throw std::invalid_argument("ratio_delta_series: finite windows required");
    std::vector<int> vars{varX, varY};
    std::sort(vars.begin(), vars.end());
    CycSeries s(scale, vars);
    int px = s.var_pos(varX), py = s.var_pos(varY);
    for (long ex = wx->second.lo; ex <= wx->second.hi; ++ex) {
        long numer = -ex - aS;
        if (numer % scale != 0) continue;
        long n = numer / scale - 1;
        long ey = n * scale + aS;
        if (!wy->second.contains(ey)) continue;
        ExpKey k = zero_key();
        detail::check_exp_range(ex);
        detail::check_exp_range(ey);
        k[px] = static_cast<int16_t>(ex);
        k[py] = static_cast<int16_t>(ey);
        s.add_term(k, Cyc(1));
    }
    s.set_truncated(true);
    s.set_valid(varX, wx->second);
    s.set_valid(varY, wy->second);
    s.set_gsupp(varX, Interval{kNegInf, kPosInf});
    s.set_gsupp(varY, Interval{kNegInf, kPosInf});
    return s;
}

std::string key_str(const ExpKey& k, const std::vector<int>& vars, long scale) {
    std::ostringstream os;
    bool first = true;
    for (size_t i = 0; i < vars.size(); ++i) {
        if (k[i] == 0) continue;
        if (!first) os << " ";
        first = false;
        os << var_name(vars[i]) << "^";
        if (k[i] % scale == 0) os << k[i] / scale;
        else os << "(" << rat_str(Rat(static_cast<long>(k[i]), scale)) << ")";
    }
    if (first) os << "1";
    return os.str();
}

}  // namespace torva
