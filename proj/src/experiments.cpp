#include "robagg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "robagg/error.hpp"

namespace robagg {
namespace {

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Standard error of the mean with the n - 1 denominator; 0 for one sample.
double sem_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
}

McqaResult summarize(const McqaStudyConfig& config, std::vector<std::vector<ResponseSet>> sets,
                     long failures) {
  McqaResult out;
  out.failures = failures;
  Rng root(config.seed);
  for (std::size_t l = 0; l < config.labels.size(); ++l) {
    for (int n : config.n_list) {
      Rng rng = root.split(0x6d637161ULL).split(l * 1000003ULL + static_cast<std::uint64_t>(n));
      AggregationReport r = bootstrap_aggregate(sets[l], n, config.replicates, rng);
      r.temperature_label = config.labels[l].name;
      out.reports.push_back(std::move(r));
    }
  }
  out.responses = std::move(sets);
  return out;
}

}  // namespace

const char* to_string(BallColor c) { return c == BallColor::kRed ? "red" : "blue"; }

std::vector<BoxBallScenario> generate_scenarios(int denominator, ScenarioFilter filter) {
  if (denominator < 1) throw ValidationError("generate_scenarios needs denominator >= 1");
  const double n = denominator;
  std::vector<BoxBallScenario> out;
  for (int a = 0; a <= denominator; ++a) {
    if (filter == ScenarioFilter::kObservableInteriorPrior && (a == 0 || a == denominator)) continue;
    for (int l = 0; l <= denominator; ++l) {
      for (int r = 0; r <= denominator; ++r) {
        for (BallColor c : {BallColor::kRed, BallColor::kBlue}) {
          BoxBallScenario s{a / n, l / n, r / n, c};
          if (color_probability(s) > 0.0) out.push_back(s);
        }
      }
    }
  }
  return out;
}

double color_probability(const BoxBallScenario& s) {
  const double left = s.drawn_color == BallColor::kRed ? s.red_given_left : 1.0 - s.red_given_left;
  const double right =
      s.drawn_color == BallColor::kRed ? s.red_given_right : 1.0 - s.red_given_right;
  return s.prior_left * left + (1.0 - s.prior_left) * right;
}

double scenario_posterior(const BoxBallScenario& s) {
  require_probability(s.prior_left, "prior_left");
  require_probability(s.red_given_left, "red_given_left");
  require_probability(s.red_given_right, "red_given_right");
  const double total = color_probability(s);
  if (!(total > 0.0)) throw ValidationError("scenario_posterior: drawn color has probability 0");
  const double left = s.drawn_color == BallColor::kRed ? s.red_given_left : 1.0 - s.red_given_left;
  return std::clamp(s.prior_left * left / total, 0.0, 1.0);
}

int simulate_expert(double posterior, RationalityLevel lambda, Rng& rng) {
  return rng.bernoulli(psi(lambda, posterior)) ? 1 : 0;
}

int plurality(std::span<const int> votes, int m, Rng& rng) {
  if (votes.empty()) throw ValidationError("plurality needs at least one vote");
  if (m < 2) throw ValidationError("plurality needs m >= 2");
  std::vector<int> counts(m, 0);
  for (int v : votes) {
    if (v < 0 || v >= m) throw ValidationError("plurality: vote out of range");
    ++counts[v];
  }
  const int top = *std::max_element(counts.begin(), counts.end());
  std::vector<int> tied;
  for (int k = 0; k < m; ++k) {
    if (counts[k] == top) tied.push_back(k);
  }
  if (tied.size() == 1) return tied[0];
  return tied[rng.below(tied.size())];
}

void validate(const ResponseSet& set) {
  if (set.option_count < 2) throw ValidationError("response set " + set.item_id + ": m < 2");
  if (set.responses.empty()) throw ValidationError("response set " + set.item_id + ": no responses");
  if (set.ground_truth < 0 || set.ground_truth >= set.option_count) {
    throw ValidationError("response set " + set.item_id + ": ground truth out of range");
  }
  for (int r : set.responses) {
    if (r < 0 || r >= set.option_count) {
      throw ValidationError("response set " + set.item_id + ": response out of range");
    }
  }
}

AggregationReport bootstrap_aggregate(std::span<const ResponseSet> sets, int n, int replicates,
                                      Rng& rng) {
  if (replicates < 1) throw ValidationError("bootstrap_aggregate needs replicates >= 1");
  if (n < 1) throw ValidationError("bootstrap_aggregate needs n >= 1");
  if (sets.empty()) throw ValidationError("bootstrap_aggregate needs at least one item");
  for (const auto& s : sets) {
    validate(s);
    if (static_cast<std::size_t>(n) > s.responses.size()) {
      std::ostringstream os;
      os << "bootstrap_aggregate: n = " << n << " exceeds the " << s.responses.size()
         << " responses of item " << s.item_id;
      throw ValidationError(os.str());
    }
  }

  AggregationReport rep;
  rep.n = n;
  rep.replicates = replicates;
  std::vector<double> replicate_means(replicates, 0.0);
  std::vector<std::vector<double>> per_item(sets.size(), std::vector<double>(replicates, 0.0));
  std::vector<int> pool;
  std::vector<int> sample(n);
  for (int b = 0; b < replicates; ++b) {
    double hits = 0.0;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto& s = sets[i];
      pool = s.responses;
      // Partial Fisher-Yates: the first n slots are a uniform subset.
      for (int k = 0; k < n; ++k) {
        const std::size_t j = k + rng.below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        sample[k] = pool[k];
      }
      const double score = plurality(sample, s.option_count, rng) == s.ground_truth ? 1.0 : 0.0;
      per_item[i][b] = score;
      hits += score;
    }
    replicate_means[b] = hits / sets.size();
  }
  rep.accuracy = mean(replicate_means);
  rep.sem = sem_of(replicate_means);
  for (const auto& scores : per_item) {
    rep.item_accuracy.push_back(mean(scores));
    rep.item_sem.push_back(sem_of(scores));
  }
  return rep;
}

std::vector<ResponseSet> synthetic_items(const ThreeSignalStructure& structure,
                                         RationalityLevel lambda, int items, int responses,
                                         int option_count, Rng& rng) {
  if (items < 1 || responses < 1) throw ValidationError("synthetic_items needs items, responses >= 1");
  if (option_count < 2) throw ValidationError("synthetic_items needs option_count >= 2");
  const double r0 = psi(lambda, 0.0);
  const double rp = psi(lambda, structure.p);
  const double r1 = psi(lambda, 1.0);
  std::vector<ResponseSet> out;
  out.reserve(items);
  for (int i = 0; i < items; ++i) {
    ResponseSet set;
    set.item_id = "syn" + std::to_string(i);
    set.option_count = option_count;
    const bool state = rng.bernoulli(structure.mu);
    set.ground_truth = static_cast<int>(rng.below(option_count));
    const int distractor =
        (set.ground_truth + 1 + static_cast<int>(rng.below(option_count - 1))) % option_count;
    for (int k = 0; k < responses; ++k) {
      const bool interior = rng.bernoulli(state ? structure.p1 : structure.p0);
      const double q = interior ? rp : (state ? r1 : r0);
      const bool report = rng.bernoulli(q);
      set.responses.push_back(report == state ? set.ground_truth : distractor);
    }
    out.push_back(std::move(set));
  }
  return out;
}

BinaryDecider simulated_decider() {
  return [](const BoxBallScenario& s, const ExpertLabel& label, int, Rng& rng) -> std::optional<int> {
    return simulate_expert(scenario_posterior(s), label.lambda, rng);
  };
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const auto n = std::min<std::size_t>(workers, count);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

std::vector<BayesRow> run_bayes_study(const BayesStudyConfig& config, const BinaryDecider& decide) {
  if (config.trials < 1) throw ValidationError("run_bayes_study needs trials >= 1");
  if (config.labels.empty()) throw ValidationError("run_bayes_study needs at least one label");
  const auto scenarios = generate_scenarios(config.denominator, config.filter);
  const std::size_t per_label = scenarios.size();
  std::vector<BayesRow> rows(per_label * config.labels.size());
  const Rng root(config.seed);
  parallel_for(rows.size(), config.max_in_flight, [&](std::size_t idx) {
    const std::size_t l = idx / per_label;
    const std::size_t s = idx % per_label;
    BayesRow& row = rows[idx];
    row.scenario_id = static_cast<int>(s);
    row.scenario = scenarios[s];
    row.posterior = scenario_posterior(scenarios[s]);
    row.label = config.labels[l].name;
    Rng rng = root.split(l).split(s);
    for (int t = 0; t < config.trials; ++t) {
      const auto d = decide(scenarios[s], config.labels[l], t, rng);
      if (!d) {
        ++row.failures;
        continue;
      }
      ++row.trials;
      row.successes += *d;
    }
  });
  return rows;
}

McqaResult run_mcqa_study(const McqaStudyConfig& config, std::span<const ResponseSet> items,
                          const OptionDecider& decide) {
  if (config.responses < 1) throw ValidationError("run_mcqa_study needs responses >= 1");
  const std::size_t count = items.size();
  std::vector<std::vector<ResponseSet>> sets(config.labels.size(),
                                             std::vector<ResponseSet>(items.begin(), items.end()));
  std::vector<long> failures(sets.size() * count, 0);
  const Rng root(config.seed);
  parallel_for(sets.size() * count, config.max_in_flight, [&](std::size_t idx) {
    const std::size_t l = idx / count;
    const std::size_t i = idx % count;
    ResponseSet& set = sets[l][i];
    set.responses.clear();
    Rng rng = root.split(l).split(i);
    for (int k = 0; k < config.responses; ++k) {
      const auto d = decide(items[i], config.labels[l], k, rng);
      if (d) {
        set.responses.push_back(*d);
      } else {
        ++failures[idx];
      }
    }
  });
  // Items left with fewer responses than the largest n cannot be resampled.
  const int n_max = config.n_list.empty() ? 1 : *std::max_element(config.n_list.begin(), config.n_list.end());
  for (auto& per_label : sets) {
    std::erase_if(per_label, [&](const ResponseSet& s) {
      return s.responses.size() < static_cast<std::size_t>(n_max);
    });
  }
  return summarize(config, std::move(sets), std::accumulate(failures.begin(), failures.end(), 0L));
}

McqaResult synthetic_mcqa_study(const McqaStudyConfig& config,
                                const ThreeSignalStructure& structure, int items,
                                int option_count) {
  std::vector<std::vector<ResponseSet>> sets;
  const Rng root(config.seed);
  for (std::size_t l = 0; l < config.labels.size(); ++l) {
    Rng rng = root.split(l);
    sets.push_back(synthetic_items(structure, config.labels[l].lambda, items, config.responses,
                                   option_count, rng));
  }
  return summarize(config, std::move(sets), 0);
}

}  // namespace robagg
