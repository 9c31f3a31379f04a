#pragma once

// Input time series: CSV ingestion, deterministic synthesis, window
// averaging onto representative periods, and net demand.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace etsa {

inline constexpr std::size_t kHoursPerYear = 8736;  // 52 weeks
inline constexpr std::size_t kHoursPerDay = 24;

/// Technology parameters of one co-scheduling case.
struct CaseConfig {
  double thermal_capacity = 0.0;  // MW
  double thermal_cost = 0.0;      // EUR/MWh
  double vre_capacity = 0.0;      // MW
  double vre_cost = 0.0;          // EUR/MWh
  double storage_emin = 0.0;      // MWh
  double storage_emax = 0.0;      // MWh
  double storage_pc_max = 0.0;    // MW
  double storage_pd_max = 0.0;    // MW
  double eta_c = 1.0;
  double eta_d = 1.0;
  double discharge_cost = 0.0;  // EUR/MWh
  double nse_cost = 0.0;        // EUR/MWh

  void validate() const {
    auto nonneg = [](double v, const char* what) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("CaseConfig: ") + what + " must be finite and >= 0");
      }
    };
    nonneg(thermal_capacity, "thermal_capacity");
    nonneg(thermal_cost, "thermal_cost");
    nonneg(vre_capacity, "vre_capacity");
    nonneg(vre_cost, "vre_cost");
    nonneg(storage_emin, "storage_emin");
    nonneg(storage_emax, "storage_emax");
    nonneg(storage_pc_max, "storage_pc_max");
    nonneg(storage_pd_max, "storage_pd_max");
    nonneg(discharge_cost, "discharge_cost");
    nonneg(nse_cost, "nse_cost");
    if (!(eta_c > 0.0 && eta_c <= 1.0)) throw std::invalid_argument("CaseConfig: eta_c must be in (0, 1]");
    if (!(eta_d > 0.0 && eta_d <= 1.0)) throw std::invalid_argument("CaseConfig: eta_d must be in (0, 1]");
    if (storage_emin > storage_emax) throw std::invalid_argument("CaseConfig: storage_emin > storage_emax");
  }
};

/// Hourly demand and per-VRE capacity factors.
struct SeriesFrame {
  std::size_t horizon_len = 0;
  std::vector<double> demand;                        // MW
  std::vector<std::string> vre_names;                // one per VRE
  std::vector<std::vector<double>> capacity_factor;  // [vre][hour], p.u.

  void validate() const {
    if (demand.size() != horizon_len) throw std::invalid_argument("SeriesFrame: demand length != horizon_len");
    if (capacity_factor.size() != vre_names.size()) {
      throw std::invalid_argument("SeriesFrame: one name per capacity-factor series required");
    }
    for (std::size_t h = 0; h < horizon_len; ++h) {
      if (!(demand[h] >= 0.0) || !std::isfinite(demand[h])) {
        throw std::invalid_argument("SeriesFrame: negative demand at hour " + std::to_string(h));
      }
    }
    for (std::size_t v = 0; v < capacity_factor.size(); ++v) {
      if (capacity_factor[v].size() != horizon_len) {
        throw std::invalid_argument("SeriesFrame: capacity factor length != horizon_len");
      }
      for (std::size_t h = 0; h < horizon_len; ++h) {
        const double f = capacity_factor[v][h];
        if (!(f >= 0.0 && f <= 1.0)) {
          throw std::invalid_argument("SeriesFrame: capacity factor outside [0,1] at hour " + std::to_string(h));
        }
      }
    }
  }

  /// Hours [begin, end) as a new frame.
  SeriesFrame slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > horizon_len) throw std::out_of_range("SeriesFrame::slice");
    SeriesFrame out;
    out.horizon_len = end - begin;
    out.demand.assign(demand.begin() + static_cast<std::ptrdiff_t>(begin),
                      demand.begin() + static_cast<std::ptrdiff_t>(end));
    out.vre_names = vre_names;
    for (const auto& cf : capacity_factor) {
      out.capacity_factor.emplace_back(cf.begin() + static_cast<std::ptrdiff_t>(begin),
                                       cf.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return out;
  }
};

/// Half-open hour interval [begin, end) on the original horizon.
struct HourRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const HourRange&, const HourRange&) = default;
};

/// One representative period: the source hours it stands for. Periods of a
/// linked submodel have one contiguous source range; aggregated unlinked
/// periods may gather hours from across the horizon.
struct RepPeriod {
  std::vector<HourRange> sources;

  std::size_t weight() const {
    std::size_t w = 0;
    for (const auto& r : sources) w += r.size();
    return w;
  }
  std::size_t first_hour() const { return sources.empty() ? 0 : sources.front().begin; }
  friend bool operator==(const RepPeriod&, const RepPeriod&) = default;
};

/// Averaged inputs of a sequence of representative periods.
struct RepPeriodSeries {
  std::vector<std::size_t> weights;           // W_r, hours
  std::vector<double> avg_demand;             // MW
  std::vector<std::vector<double>> avg_cf;    // [vre][period]

  std::size_t size() const { return weights.size(); }
};

class SeriesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SeriesSchema {
  std::string demand_column = "demand_mw";
  std::string cf_prefix = "cf_";
  std::string timestamp_column = "timestamp";
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    cells.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

}  // namespace detail

/// Reads a series CSV: a header row naming `demand_mw` and one `cf_<name>`
/// column per VRE; a `timestamp` column is ignored. Errors name the data row
/// (1-based) and column.
inline SeriesFrame load_series(const std::string& path, const SeriesSchema& schema = {},
                               double demand_scale = 1.0) {
  std::ifstream in(path);
  if (!in) throw SeriesError("cannot open series file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw SeriesError(path + ": no data rows");
  const std::string header_line = line;
  const auto header = detail::split_csv_line(header_line);
  std::ptrdiff_t demand_col = -1;
  std::vector<std::size_t> cf_cols;
  SeriesFrame frame;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string_view name = header[c];
    if (name == schema.demand_column) {
      demand_col = static_cast<std::ptrdiff_t>(c);
    } else if (name.size() > schema.cf_prefix.size() && name.substr(0, schema.cf_prefix.size()) == schema.cf_prefix) {
      cf_cols.push_back(c);
      frame.vre_names.emplace_back(name.substr(schema.cf_prefix.size()));
    }
  }
  if (demand_col < 0) throw SeriesError(path + ": missing column '" + schema.demand_column + "'");
  if (cf_cols.empty()) throw SeriesError(path + ": missing capacity-factor column '" + schema.cf_prefix + "<name>'");
  frame.capacity_factor.resize(cf_cols.size());

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    auto cell = [&](std::size_t c) -> std::string_view {
      if (c >= cells.size()) {
        throw SeriesError(path + ": row " + std::to_string(row) + ": missing cell in column '" +
                          std::string(header[c]) + "'");
      }
      return cells[c];
    };
    double d = 0.0;
    const auto dc = static_cast<std::size_t>(demand_col);
    if (!detail::parse_double(cell(dc), d)) {
      throw SeriesError(path + ": row " + std::to_string(row) + ", column '" + std::string(header[dc]) +
                        "': non-numeric cell '" + std::string(cell(dc)) + "'");
    }
    if (d < 0.0) {
      throw SeriesError(path + ": row " + std::to_string(row) + ", column '" + std::string(header[dc]) +
                        "': negative demand " + std::string(cell(dc)));
    }
    frame.demand.push_back(d * demand_scale);
    for (std::size_t v = 0; v < cf_cols.size(); ++v) {
      const std::size_t c = cf_cols[v];
      double f = 0.0;
      if (!detail::parse_double(cell(c), f)) {
        throw SeriesError(path + ": row " + std::to_string(row) + ", column '" + std::string(header[c]) +
                          "': non-numeric cell '" + std::string(cell(c)) + "'");
      }
      if (f < 0.0 || f > 1.0) {
        throw SeriesError(path + ": row " + std::to_string(row) + ", column '" + std::string(header[c]) +
                          "': capacity factor " + std::string(cell(c)) + " outside [0,1]");
      }
      frame.capacity_factor[v].push_back(f);
    }
  }
  if (row == 0) throw SeriesError(path + ": no data rows");
  frame.horizon_len = row;
  return frame;
}

/// Writes `frame` in the layout load_series reads.
inline void write_series(std::ostream& os, const SeriesFrame& frame) {
  os << "hour,demand_mw";
  for (const auto& n : frame.vre_names) os << ",cf_" << n;
  os << '\n';
  char buf[64];
  for (std::size_t h = 0; h < frame.horizon_len; ++h) {
    os << h;
    std::snprintf(buf, sizeof buf, ",%.17g", frame.demand[h]);
    os << buf;
    for (const auto& cf : frame.capacity_factor) {
      std::snprintf(buf, sizeof buf, ",%.17g", cf[h]);
      os << buf;
    }
    os << '\n';
  }
}

enum class VreProfile { Solar, Wind };

/// Generator knobs; the defaults are the documented synthetic reference.
struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t years = 1;
  VreProfile profile = VreProfile::Solar;
  double demand_scale = 1.0;
  double base_load = 380.0;         // MW
  double daily_amplitude = 70.0;    // MW, evening peak
  double seasonal_amplitude = 40.0; // MW, winter peak
  double noise_sd = 15.0;           // MW, AR(1) innovations
  double noise_persistence = 0.8;   // AR(1) coefficient of the demand noise
  double noise_clip = 3.0;          // noise bounded to +-noise_clip * sd
};

namespace detail {

// splitmix64 seeding feeding a xoshiro256** stream; bit-reproducible on any
// platform, unlike the standard distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    for (auto& s : state_) s = splitmix(seed);
  }
  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  static std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace detail

/// Deterministic synthetic hourly series of `years` * 8736 hours. Demand is a
/// base load with an evening-peak daily cycle, a winter-peak seasonal cycle
/// and bounded AR(1) noise. Solar capacity factors are zero at night with a
/// seasonal day length and amplitude modulated by daily cloudiness; wind
/// capacity factors follow an autocorrelated latent process.
inline SeriesFrame synth_series(const SynthConfig& cfg) {
  if (cfg.years < 1) throw std::invalid_argument("synth_series: years must be >= 1");
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t hours = cfg.years * kHoursPerYear;
  const double days_per_year = static_cast<double>(kHoursPerYear / kHoursPerDay);
  detail::Rng rng(cfg.seed);

  SeriesFrame frame;
  frame.horizon_len = hours;
  frame.demand.resize(hours);
  frame.vre_names = {cfg.profile == VreProfile::Solar ? "solar" : "wind"};
  frame.capacity_factor.assign(1, std::vector<double>(hours, 0.0));
  auto& cf = frame.capacity_factor[0];

  double noise = 0.0;
  double cloud = 0.0;
  double wind = 0.0;
  const double innov = std::sqrt(1.0 - cfg.noise_persistence * cfg.noise_persistence);
  for (std::size_t t = 0; t < hours; ++t) {
    const double hour = static_cast<double>(t % kHoursPerDay);
    const double doy = static_cast<double>((t / kHoursPerDay) % (kHoursPerYear / kHoursPerDay));
    const double season = std::cos(two_pi * doy / days_per_year);  // +1 mid-winter

    noise = cfg.noise_persistence * noise + innov * rng.normal();
    const double bounded = std::clamp(noise, -cfg.noise_clip, cfg.noise_clip) * cfg.noise_sd;
    const double daily = std::cos(two_pi * (hour - 19.0) / 24.0);
    const double d = cfg.base_load + cfg.daily_amplitude * daily + cfg.seasonal_amplitude * season + bounded;
    frame.demand[t] = std::max(0.0, d) * cfg.demand_scale;

    if (cfg.profile == VreProfile::Solar) {
      if (t % kHoursPerDay == 0) {
        cloud = 0.6 * cloud + 0.8 * rng.normal();
      }
      const double day_len = 12.0 - 4.0 * season;
      const double sunrise = 12.5 - day_len / 2.0;
      const double x = (hour + 0.5 - sunrise) / day_len;
      double v = 0.0;
      if (x > 0.0 && x < 1.0) {
        const double peak = 0.55 - 0.25 * season;
        const double clearness = 0.65 + 0.35 * std::tanh(0.8 - cloud);
        v = peak * std::sin(std::numbers::pi * x) * clearness * (1.0 + 0.05 * rng.normal());
      } else {
        rng.next();  // keep the stream aligned across day lengths
      }
      cf[t] = detail::clamp01(v);
    } else {
      wind = 0.97 * wind + std::sqrt(1.0 - 0.97 * 0.97) * rng.normal();
      cf[t] = detail::clamp01(0.33 + 0.06 * season + 0.22 * wind);
    }
  }
  return frame;
}

/// Arithmetic means of the inputs over each representative period's source
/// hours; weights are the hour counts.
inline RepPeriodSeries average_series(const SeriesFrame& frame, std::span<const RepPeriod> periods) {
  RepPeriodSeries out;
  out.avg_cf.assign(frame.capacity_factor.size(), {});
  for (const auto& p : periods) {
    const std::size_t w = p.weight();
    if (w == 0) throw std::invalid_argument("average_series: empty representative period");
    double sd = 0.0;
    std::vector<double> scf(frame.capacity_factor.size(), 0.0);
    for (const auto& r : p.sources) {
      if (r.begin > r.end || r.end > frame.horizon_len) throw std::out_of_range("average_series: source range outside horizon");
      for (std::size_t h = r.begin; h < r.end; ++h) {
        sd += frame.demand[h];
        for (std::size_t v = 0; v < scf.size(); ++v) scf[v] += frame.capacity_factor[v][h];
      }
    }
    const double wd = static_cast<double>(w);
    out.weights.push_back(w);
    out.avg_demand.push_back(sd / wd);
    for (std::size_t v = 0; v < scf.size(); ++v) out.avg_cf[v].push_back(scf[v] / wd);
  }
  return out;
}

/// max{0, D_r - sum_v vre_capacity * CF_{r,v}} per hour.
inline std::vector<double> net_demand(const SeriesFrame& frame, const CaseConfig& c) {
  std::vector<double> out(frame.horizon_len);
  for (std::size_t h = 0; h < frame.horizon_len; ++h) {
    double avail = 0.0;
    for (const auto& cf : frame.capacity_factor) avail += c.vre_capacity * cf[h];
    out[h] = std::max(0.0, frame.demand[h] - avail);
  }
  return out;
}

}  // namespace etsa
