#include "cooc/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "cooc/error.hpp"
#include "cooc/rng.hpp"

namespace cooc {

std::vector<Day> weekday_calendar(Day start, int n_days) {
  using namespace std::chrono;
  std::vector<Day> out;
  sys_days d{year_month_day{year{start.year()}, month{static_cast<unsigned>(start.month())},
                            day{static_cast<unsigned>(start.dom())}}};
  if (!year_month_day{d}.ok()) throw DataError("invalid start day " + format_day(start));
  bool first = true;
  while (static_cast<int>(out.size()) < n_days) {
    const weekday wd{d};
    if (first || (wd != Saturday && wd != Sunday)) {
      const year_month_day ymd{d};
      out.push_back(Day{static_cast<std::int32_t>(int(ymd.year()) * 10000 + unsigned(ymd.month()) * 100 +
                                                  unsigned(ymd.day()))});
    }
    first = false;
    d += days{1};
  }
  return out;
}

namespace {

constexpr std::int64_t kMargin = 1'000'000;  // keep generated times 1 ms inside the session

struct Pending {
  std::int64_t ts;
  Direction dir;
};

std::string ticker_name(int i) {
  std::string s = std::to_string(i);
  return "SYM" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

// Sorted, strictly increasing times with price and size filled.
void emit_symbol_day(std::vector<Pending>& pending, SymbolId sym, Day day, double log_open, double raw_oc,
                     Engine& rng, std::vector<TradeRecord>& out) {
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.ts < b.ts; });
  std::normal_distribution<double> micro(0.0, 0.0005);
  std::uniform_int_distribution<int> lots(1, 5);
  std::int64_t last = kSessionOpenNs - 1;
  for (auto& p : pending) {
    p.ts = std::max(p.ts, last + 1);
    last = p.ts;
    const double frac = static_cast<double>(p.ts - kSessionOpenNs) / static_cast<double>(kSessionCloseNs - kSessionOpenNs);
    const double price = std::exp(log_open + raw_oc * frac + micro(rng));
    const auto price4 = std::max<std::int64_t>(1, std::llround(price * 1e4));
    out.push_back({sym, day, p.ts, p.dir, 100 * lots(rng), price4});
  }
}

std::int64_t uniform_time(Engine& rng) {
  std::uniform_int_distribution<std::int64_t> u(kSessionOpenNs + kMargin, kSessionCloseNs - kMargin);
  return u(rng);
}

Direction coin(Engine& rng, double p_buy = 0.5) {
  return std::bernoulli_distribution(p_buy)(rng) ? Direction::Buy : Direction::Sell;
}

FactorRow random_factors(Day day, double spy, Engine& rng) {
  std::normal_distribution<double> f(0.0, 0.005);
  FactorRow r;
  r.day = day;
  r.mkt = spy + std::normal_distribution<double>(0.0, 0.001)(rng);
  r.smb = f(rng);
  r.hml = f(rng);
  r.rmw = f(rng);
  r.cma = f(rng);
  r.mom = f(rng);
  r.rf = 0.0001;
  return r;
}

}  // namespace

SyntheticMarket simulate_planted_market(const PlantedConfig& c) {
  if (c.n_symbols < 2 || c.n_days < 2) throw UsageError("planted market needs at least 2 symbols and 2 days");
  if (c.burst_span_ns < 1) throw UsageError("burst span must be positive");
  SyntheticMarket m;
  const auto ns = static_cast<std::size_t>(c.n_symbols);
  const auto nd = static_cast<std::size_t>(c.n_days);
  for (int i = 0; i < c.n_symbols; ++i) m.tickers.push_back(ticker_name(i));
  m.days = weekday_calendar(c.start, c.n_days);

  // Daily prices and the latent signal.
  auto rng = make_engine(c.seed, "planted_returns");
  std::uniform_real_distribution<double> sig(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, c.noise_vol), overnight(0.0, 0.002);
  std::normal_distribution<double> market(0.0003, c.market_vol);
  m.signal.resize(ns * nd);
  for (auto& s : m.signal) s = sig(rng);
  std::vector<double> spy_oc(nd);
  std::vector<double> raw(ns * nd), log_open(ns * nd);
  double spy_open = std::log(250.0);
  for (std::size_t d = 0; d < nd; ++d) {
    spy_oc[d] = market(rng);
    m.spy.push_back({static_cast<SymbolId>(ns), m.days[d], std::exp(spy_open), std::exp(spy_open + spy_oc[d])});
    spy_open += spy_oc[d] + overnight(rng);
    m.factors.push_back(random_factors(m.days[d], spy_oc[d], rng));
  }
  std::uniform_real_distribution<double> start_price(std::log(20.0), std::log(200.0));
  for (std::size_t s = 0; s < ns; ++s) {
    double lo = start_price(rng);
    for (std::size_t d = 0; d < nd; ++d) {
      const double planted = d > 0 ? c.beta * m.signal[s * nd + d - 1] : 0.0;
      raw[s * nd + d] = spy_oc[d] + planted + noise(rng);
      log_open[s * nd + d] = lo;
      m.bars.push_back({static_cast<SymbolId>(s), m.days[d], std::exp(lo), std::exp(lo + raw[s * nd + d])});
      lo += raw[s * nd + d] + overnight(rng);
    }
  }

  std::uniform_int_distribution<std::int64_t> jitter(0, c.burst_span_ns - 1);
  for (std::size_t d = 0; d < nd; ++d) {
    std::vector<std::vector<Pending>> pending(ns);
    auto cross = make_engine(c.seed, "planted_cross", d);
    const int n_cross = std::poisson_distribution<int>(c.cross_bursts_per_day)(cross);
    std::vector<SymbolId> ids(ns);
    std::iota(ids.begin(), ids.end(), 0);
    const int max_members = std::min(5, c.n_symbols);
    for (int b = 0; b < n_cross; ++b) {
      const auto t0 = uniform_time(cross);
      const int k = std::uniform_int_distribution<int>(2, max_members)(cross);
      std::shuffle(ids.begin(), ids.end(), cross);
      for (int j = 0; j < k; ++j) {
        auto& dst = pending[static_cast<std::size_t>(ids[j])];
        dst.push_back({t0 + jitter(cross), coin(cross)});
        // Some members trade twice inside the burst, which makes both trades nis_b.
        if (std::bernoulli_distribution(0.25)(cross)) dst.push_back({t0 + jitter(cross), coin(cross)});
      }
    }
    for (std::size_t s = 0; s < ns; ++s) {
      auto r = make_engine(c.seed, "planted_trades", s * nd + d);
      auto& p = pending[s];
      const double p_buy = 0.5 * (1.0 + m.signal[s * nd + d]);
      const int n_inf = std::poisson_distribution<int>(c.informed_per_day)(r);
      for (int j = 0; j < n_inf; ++j) p.push_back({uniform_time(r), coin(r, p_buy)});
      const int n_self = std::poisson_distribution<int>(c.self_bursts_per_day)(r);
      for (int b = 0; b < n_self; ++b) {
        const auto t0 = uniform_time(r);
        const int k = std::uniform_int_distribution<int>(2, 4)(r);
        for (int j = 0; j < k; ++j) p.push_back({t0 + jitter(r), coin(r)});
      }
      emit_symbol_day(p, static_cast<SymbolId>(s), m.days[d], log_open[s * nd + d], raw[s * nd + d], r, m.trades);
    }
  }
  return m;
}

SyntheticMarket simulate_poisson_market(const PoissonConfig& c) {
  if (c.n_symbols < 1 || c.n_days < 1) throw UsageError("Poisson market needs at least one symbol and one day");
  if (!(c.rate_per_second > 0.0)) throw UsageError("arrival rate must be positive");
  SyntheticMarket m;
  const auto ns = static_cast<std::size_t>(c.n_symbols);
  for (int i = 0; i < c.n_symbols; ++i) m.tickers.push_back(ticker_name(i));
  m.days = weekday_calendar(c.start, c.n_days);
  const double seconds = static_cast<double>(kSessionCloseNs - kSessionOpenNs) / 1e9;
  std::uniform_int_distribution<std::int64_t> when(kSessionOpenNs, kSessionCloseNs - 1);
  for (std::size_t d = 0; d < m.days.size(); ++d) {
    m.spy.push_back({static_cast<SymbolId>(ns), m.days[d], 250.0, 250.0});
    auto fr = make_engine(c.seed, "poisson_factors", d);
    m.factors.push_back(random_factors(m.days[d], 0.0, fr));
    for (std::size_t s = 0; s < ns; ++s) {
      auto r = make_engine(c.seed, "poisson_trades", s * m.days.size() + d);
      const int n = std::poisson_distribution<int>(c.rate_per_second * seconds)(r);
      std::vector<std::int64_t> ts;
      ts.reserve(static_cast<std::size_t>(n));
      // Redraw collisions so that times stay i.i.d. uniform given distinctness.
      while (static_cast<int>(ts.size()) < n) {
        ts.push_back(when(r));
        if (static_cast<int>(ts.size()) == n) {
          std::sort(ts.begin(), ts.end());
          ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        }
      }
      for (auto t : ts) m.trades.push_back({static_cast<SymbolId>(s), m.days[d], t, coin(r), 100, 1'000'000});
      m.bars.push_back({static_cast<SymbolId>(s), m.days[d], 100.0, 100.0});
    }
  }
  return m;
}

void write_lobster_messages(std::ostream& out, std::span<const TradeRecord> trades) {
  std::int64_t order_id = 1000;
  const auto time = [](std::int64_t ts) {
    std::string frac = std::to_string(ts % kNsPerSecond);
    return std::to_string(ts / kNsPerSecond) + "." + std::string(9 - frac.size(), '0') + frac;
  };
  for (const auto& t : trades) {
    const int passive = static_cast<int>(opposite(t.direction));
    const auto id = order_id++;
    out << time(t.ts_ns) << ",1," << id << ',' << t.size << ',' << t.price4 << ',' << passive << '\n';
    out << time(t.ts_ns) << ",4," << id << ',' << t.size << ',' << t.price4 << ',' << passive << '\n';
  }
}

}  // namespace cooc
