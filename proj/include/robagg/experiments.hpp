#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robagg/model.hpp"
#include "robagg/rng.hpp"

namespace robagg {

enum class BallColor { kRed, kBlue };

const char* to_string(BallColor c);

struct BoxBallScenario {
  double prior_left = 0.5;
  double red_given_left = 0.5;
  double red_given_right = 0.5;
  BallColor drawn_color = BallColor::kRed;
};

enum class ScenarioFilter {
  kObservable,              // drop only zero-probability draws
  kObservableInteriorPrior  // also drop priors 0 and 1
};

std::vector<BoxBallScenario> generate_scenarios(int denominator,
                                                ScenarioFilter filter = ScenarioFilter::kObservable);

double color_probability(const BoxBallScenario& s);

// Pr[left | drawn color]; ValidationError when the draw has probability 0.
double scenario_posterior(const BoxBallScenario& s);

// 1 with probability psi_lambda(posterior).
int simulate_expert(double posterior, RationalityLevel lambda, Rng& rng);

// Modal option; ties broken uniformly with rng.
int plurality(std::span<const int> votes, int m, Rng& rng);

struct ResponseSet {
  std::string item_id;
  int option_count = 2;
  std::vector<int> responses;
  int ground_truth = 0;
};

void validate(const ResponseSet& set);

struct AggregationReport {
  std::string temperature_label;
  int n = 1;
  double accuracy = 0.0;
  double sem = 0.0;  // over replicate means
  int replicates = 1;
  std::vector<double> item_accuracy;  // per item, averaged over replicates
  std::vector<double> item_sem;
};

AggregationReport bootstrap_aggregate(std::span<const ResponseSet> sets, int n, int replicates,
                                      Rng& rng);

// Items whose responses come from quantal experts on a three-signal
// structure: the state is drawn from mu, each response is the ground truth
// when the expert's report matches the state and a fixed distractor
// otherwise.
std::vector<ResponseSet> synthetic_items(const ThreeSignalStructure& structure,
                                         RationalityLevel lambda, int items, int responses,
                                         int option_count, Rng& rng);

struct ExpertLabel {
  std::string name;                                          // e.g. "t=0.5"
  RationalityLevel lambda = RationalityLevel::infinite();    // simulated experts
  double temperature = 0.0;                                  // LLM experts
};

// A decision source for the box-ball study: 1 = left, 0 = right; nullopt
// marks a failed query that is excluded and counted.
using BinaryDecider = std::function<std::optional<int>(
    const BoxBallScenario&, const ExpertLabel&, int trial, Rng& rng)>;

BinaryDecider simulated_decider();

struct BayesStudyConfig {
  int denominator = 5;
  ScenarioFilter filter = ScenarioFilter::kObservable;
  int trials = 20;
  std::uint64_t seed = 0;
  std::vector<ExpertLabel> labels;
  int max_in_flight = 1;
};

struct BayesRow {
  int scenario_id = 0;
  BoxBallScenario scenario;
  double posterior = 0.5;
  std::string label;
  long successes = 0;  // left choices
  long trials = 0;     // valid decisions
  long failures = 0;
};

std::vector<BayesRow> run_bayes_study(const BayesStudyConfig& config, const BinaryDecider& decide);

// Option-index source for the question-answering study; nullopt marks a
// failed query.
using OptionDecider = std::function<std::optional<int>(
    const ResponseSet& item, const ExpertLabel&, int sample, Rng& rng)>;

struct McqaStudyConfig {
  std::vector<ExpertLabel> labels;
  std::vector<int> n_list{1, 3, 5};
  int responses = 20;
  int replicates = 1000;
  std::uint64_t seed = 0;
  int max_in_flight = 1;
};

struct McqaResult {
  std::vector<std::vector<ResponseSet>> responses;  // per label
  std::vector<AggregationReport> reports;           // per (label, n)
  long failures = 0;
};

// items carry id, option count and ground truth; their responses are
// overwritten by the decider.
McqaResult run_mcqa_study(const McqaStudyConfig& config, std::span<const ResponseSet> items,
                          const OptionDecider& decide);

// Same study with responses from synthetic_items per label.
McqaResult synthetic_mcqa_study(const McqaStudyConfig& config,
                                const ThreeSignalStructure& structure, int items,
                                int option_count);

// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& body);

}  // namespace robagg
