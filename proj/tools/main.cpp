#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "output.hpp"
#include "robagg/aggregate.hpp"
#include "robagg/error.hpp"
#include "robagg/experiments.hpp"
#include "robagg/fit.hpp"
#include "robagg/llm.hpp"
#include "robagg/reduce.hpp"
#include "robagg/robust.hpp"

namespace fs = std::filesystem;
using namespace robagg;
using namespace robagg::cli;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  fs::path out = ".";
  std::optional<int> resolution;
  std::optional<int> iterations;
  std::optional<double> tol;
};

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " '" + s + "' as a number");
  }
}

long to_long(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v)) throw ValidationError(what + " must be an integer, got " + s);
  return static_cast<long>(v);
}

std::vector<double> lambda_range(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw ValidationError("lambda range needs min <= max and step > 0");
  std::vector<double> out;
  const long count = std::lround((hi - lo) / step);
  for (long i = 0; i <= count; ++i) out.push_back(lo + i * step);
  return out;
}

RationalityLevel parse_level(const std::string& s) {
  if (s == "inf" || s == "infinite") return RationalityLevel::infinite();
  return RationalityLevel::finite(to_double(s, "lambda"));
}

// "name:lambda,name:lambda"
std::vector<ExpertLabel> parse_labels(const std::string& text) {
  std::vector<ExpertLabel> labels;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) throw ValidationError("label '" + item + "' needs name:lambda");
    labels.push_back({item.substr(0, colon), parse_level(item.substr(colon + 1)), 0.0});
  }
  if (labels.empty()) throw ValidationError("no expert labels given");
  return labels;
}

std::string safe_name(std::string s) {
  for (auto& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
  }
  return s;
}

GeneralSignalStructure read_structure(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(load_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  try {
    if (j.contains("atoms")) {
      std::vector<SignalAtom> atoms;
      for (const auto& a : j.at("atoms")) {
        atoms.push_back({a.at("posterior").get<double>(), a.at("mass").get<double>()});
      }
      return make_general(j.at("mu").get<double>(), atoms);
    }
    return to_general(make_three_signal(j.at("mu").get<double>(), j.at("p0").get<double>(),
                                        j.at("p1").get<double>()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": expected {mu, atoms:[{posterior, mass}]} or "
                                          "{mu, p0, p1}: " + e.what());
  }
}

std::vector<ChoiceObservation> read_observations(const fs::path& path, std::optional<long> trials) {
  const auto t = read_csv(path);
  const int p = t.column("posterior");
  const int k = t.column("successes");
  const int m = t.column("trials");
  const int prop = t.column("proportion");
  if (p < 0) throw ValidationError(path.string() + ": missing 'posterior' column");
  std::vector<ChoiceObservation> obs;
  for (const auto& r : t.rows) {
    ChoiceObservation o;
    o.posterior = to_double(r[p], "posterior");
    if (k >= 0 && m >= 0) {
      o.successes = to_long(r[k], "successes");
      o.trials = to_long(r[m], "trials");
    } else if (prop >= 0) {
      if (!trials) throw ValidationError("proportion input needs --trials (standard errors need counts)");
      const double q = to_double(r[prop], "proportion");
      require_probability(q, "proportion");
      o.trials = *trials;
      o.successes = std::lround(q * *trials);
    } else {
      throw ValidationError(path.string() + ": need successes,trials or proportion columns");
    }
    validate(o);
    obs.push_back(o);
  }
  return obs;
}

std::vector<McqaItem> read_items(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::vector<McqaItem> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      McqaItem item;
      item.id = j.at("id").get<std::string>();
      item.question = j.at("question").get<std::string>();
      item.options = j.at("options").get<std::vector<std::string>>();
      const auto answer = j.at("answer").get<std::string>();
      if (answer.size() != 1 || answer[0] < 'A' ||
          answer[0] >= 'A' + static_cast<int>(item.options.size())) {
        throw ValidationError("answer must be an option letter");
      }
      item.answer = answer[0] - 'A';
      items.push_back(std::move(item));
    } catch (const std::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

// Offline stand-in for a completion service: answers are a deterministic
// function of (prompt, temperature, sample).
std::string mock_completion(const LlmRequest& r) {
  const std::string h = sha256_hex(r.prompt + "|" + std::to_string(r.temperature) + "|" +
                                   std::to_string(r.sample_index));
  const unsigned pick = std::stoul(h.substr(0, 8), nullptr, 16);
  static const std::regex option_line(R"(^([A-Z])\) )", std::regex::multiline);
  int options = 0;
  for (auto it = std::sregex_iterator(r.prompt.begin(), r.prompt.end(), option_line);
       it != std::sregex_iterator(); ++it) {
    ++options;
  }
  const char answer = options > 0 ? static_cast<char>('A' + pick % options) : (pick % 2 ? 'L' : 'R');
  return std::string("<reason>mock</reason>\n<answer>") + answer + "</answer>";
}

void write_bayes(const std::vector<BayesRow>& rows, const std::vector<ExpertLabel>& labels,
                 const Globals& g, const RunInfo& info) {
  CsvWriter data(g.out / "bayes_dataset.csv", info,
                 "scenario_id,prior,red_l,red_r,color,temperature,successes,trials");
  for (const auto& r : rows) {
    data.row(r.scenario_id, r.scenario.prior_left, r.scenario.red_given_left,
             r.scenario.red_given_right, to_string(r.scenario.drawn_color), r.label, r.successes,
             r.trials);
  }
  long failures = 0;
  for (const auto& label : labels) {
    CsvWriter fit(g.out / ("fit_input_" + safe_name(label.name) + ".csv"), info,
                  "posterior,successes,trials");
    for (const auto& r : rows) {
      if (r.label == label.name) fit.row(r.posterior, r.successes, r.trials);
    }
  }
  for (const auto& r : rows) failures += r.failures;
  std::cout << "wrote " << rows.size() << " rows to " << (g.out / "bayes_dataset.csv").string();
  if (failures) std::cout << " (" << failures << " failed queries excluded)";
  std::cout << '\n';
}

void write_mcqa(const McqaResult& res, std::size_t n_count, const Globals& g, const RunInfo& info) {
  CsvWriter out(g.out / "mcqa_accuracy.csv", info, "item_id,temperature,n,accuracy,sem,replicates");
  // reports are label-major, one per group size
  for (std::size_t r = 0; r < res.reports.size(); ++r) {
    const auto& rep = res.reports[r];
    const auto& sets = res.responses.at(r / n_count);
    out.row("ALL", rep.temperature_label, rep.n, rep.accuracy, rep.sem, rep.replicates);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      out.row(sets[i].item_id, rep.temperature_label, rep.n, rep.item_accuracy[i], rep.item_sem[i],
              rep.replicates);
    }
  }
  if (res.failures) std::cout << res.failures << " failed queries excluded\n";
  std::cout << "wrote " << out.path().string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust aggregation of boundedly rational expert decisions"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", ROBAGG_VERSION);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for all randomness")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--resolution", g.resolution, "Grid resolution override");
  app.add_option("--iterations", g.iterations, "Solver iteration override");
  app.add_option("--tol", g.tol, "Tolerance override");

  RunInfo info;
  info.version = std::string("robagg ") + ROBAGG_VERSION;
  for (int i = 0; i < argc; ++i) info.command_line += (i ? " " : "") + std::string(argv[i]);

  // g-of-n
  int n_min = 3, n_max = 20;
  auto* gn = app.add_subcommand("g-of-n", "Threshold g(n) by bisection");
  gn->add_option("--n-min", n_min)->capture_default_str();
  gn->add_option("--n-max", n_max)->capture_default_str();

  // regret-sweep / advantage
  double l_min = 0.0, l_max = 5.0, l_step = 0.1;
  std::vector<int> n_list{1, 3, 5};
  bool no_refine = false;
  auto* sweep = app.add_subcommand("regret-sweep", "Worst-case regret of majority vs the minimax aggregator");
  sweep->add_option("--lambda-min", l_min)->capture_default_str();
  sweep->add_option("--lambda-max", l_max)->capture_default_str();
  sweep->add_option("--lambda-step", l_step)->capture_default_str();
  sweep->add_option("--n-list", n_list, "Group sizes")->delimiter(',')->capture_default_str();
  sweep->add_flag("--no-refine", no_refine, "Skip off-lattice refinement of the upper bound");

  double a_max = 10.0, a_step = 0.05;
  std::vector<int> a_n{1, 2, 3, 5};
  fs::path a_structure;
  auto* adv = app.add_subcommand("advantage", "Majority and omniscient utility along lambda");
  adv->add_option("--lambda-max", a_max)->capture_default_str();
  adv->add_option("--lambda-step", a_step)->capture_default_str();
  adv->add_option("--n-list", a_n)->delimiter(',')->capture_default_str();
  adv->add_option("--structure", a_structure, "Three-signal structure JSON (default: theta-star)");

  // reduce
  fs::path r_input;
  double r_lambda = 1.0;
  auto* red = app.add_subcommand("reduce", "Canonical three-signal form of a structure");
  red->add_option("--input", r_input, "Structure JSON")->required();
  red->add_option("--lambda", r_lambda)->required();

  // fit
  fs::path f_input;
  bool f_raw = false;
  std::optional<long> f_trials;
  auto* fitc = app.add_subcommand("fit", "Estimate lambda from choice data");
  fitc->add_option("--input", f_input, "CSV: posterior,successes,trials (or posterior,proportion)")->required();
  fitc->add_flag("--no-symmetrize", f_raw, "Fit the records as given");
  fitc->add_option("--trials", f_trials, "Trials per record for proportion inputs");

  // simulate
  std::string study = "bayes";
  std::string labels_spec = "t=0:inf,t=0.5:13.25,t=1:8.93";
  int denominator = 5, trials = 20, items = 500, options = 5, responses = 20, replicates = 1000;
  std::string filter = "observable";
  std::vector<int> mc_n{1, 3, 5};
  auto* sim = app.add_subcommand("simulate", "Studies with simulated quantal experts");
  sim->add_option("--study", study)->check(CLI::IsMember({"bayes", "mcqa"}))->capture_default_str();
  sim->add_option("--labels", labels_spec, "name:lambda list; lambda may be inf")->capture_default_str();
  sim->add_option("--denominator", denominator)->capture_default_str();
  sim->add_option("--filter", filter)->check(CLI::IsMember({"observable", "interior"}))->capture_default_str();
  sim->add_option("--trials", trials)->capture_default_str();
  sim->add_option("--items", items)->capture_default_str();
  sim->add_option("--options", options)->capture_default_str();
  sim->add_option("--responses", responses)->capture_default_str();
  sim->add_option("--replicates", replicates)->capture_default_str();
  sim->add_option("--n-list", mc_n)->delimiter(',')->capture_default_str();

  // llm-run
  std::string base_url, model = "gpt-4o-mini", key_env = "ROBAGG_API_KEY";
  std::vector<double> temperatures{0.0, 0.5, 1.0};
  fs::path cache_path, items_path, prompts_dir = ROBAGG_PROMPTS_DIR;
  bool mock = false;
  int in_flight = 4;
  auto* llm = app.add_subcommand("llm-run", "Studies with a chat-completions endpoint");
  llm->add_option("--study", study)->check(CLI::IsMember({"bayes", "mcqa"}))->capture_default_str();
  llm->add_option("--base-url", base_url, "Endpoint base URL, e.g. https://host/v1");
  llm->add_option("--model", model)->capture_default_str();
  llm->add_option("--api-key-env", key_env)->capture_default_str();
  llm->add_option("--temperatures", temperatures)->delimiter(',')->capture_default_str();
  llm->add_option("--cache", cache_path, "JSONL cache (default: <out>/llm_cache.jsonl)");
  llm->add_option("--items", items_path, "Question JSONL for --study mcqa");
  llm->add_option("--prompts-dir", prompts_dir)->capture_default_str();
  llm->add_flag("--mock", mock, "Offline mock transport");
  llm->add_option("--max-in-flight", in_flight)->capture_default_str();
  llm->add_option("--denominator", denominator)->capture_default_str();
  llm->add_option("--filter", filter)->check(CLI::IsMember({"observable", "interior"}))->capture_default_str();
  llm->add_option("--trials", trials)->capture_default_str();
  llm->add_option("--responses", responses)->capture_default_str();
  llm->add_option("--replicates", replicates)->capture_default_str();
  llm->add_option("--n-list", mc_n)->delimiter(',')->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    info.seed = g.seed;
    if (*gn) {
      const int res = g.resolution.value_or(kRobustDefaults.threshold_resolution);
      const double tol = g.tol.value_or(kRobustDefaults.lambda_tolerance);
      CsvWriter out(g.out / "gn.csv", info, "n,g,tol,resolution");
      for (int n = n_min; n <= n_max; ++n) {
        const auto r = g_of_n(n, tol, res);
        if (r.is_infinite()) {
          out.row(n, "inf", tol, res);
        } else {
          out.row(n, r.g, tol, res);
        }
      }
      std::cout << "wrote " << out.path().string() << '\n';
    } else if (*sweep) {
      MinimaxOptions opt;
      opt.resolution = g.resolution.value_or(opt.resolution);
      opt.iterations = g.iterations.value_or(opt.iterations);
      opt.refine = !no_refine;
      const auto grid = lambda_range(l_min, l_max, l_step);
      const auto rows = regret_sweep(grid, n_list, opt);
      CsvWriter out(g.out / "regret_sweep.csv", info, "lambda,n,regret_majority,regret_optimal,duality_gap");
      for (const auto& r : rows) out.row(r.lambda, r.n, r.regret_majority, r.regret_optimal, r.duality_gap);
      std::cout << "wrote " << rows.size() << " rows to " << out.path().string() << '\n';
    } else if (*adv) {
      ThreeSignalStructure s = theta_star();
      if (!a_structure.empty()) {
        const auto j = nlohmann::json::parse(load_text(a_structure));
        s = make_three_signal(j.at("mu").get<double>(), j.at("p0").get<double>(), j.at("p1").get<double>());
      }
      const auto grid = lambda_range(0.0, a_max, a_step);
      CsvWriter out(g.out / "advantage.csv", info, "lambda,n,u_majority,u_omniscient");
      for (int n : a_n) {
        for (const auto& r : advantage_curve(s, n, grid)) out.row(r.lambda, r.n, r.utility_majority, r.utility_omniscient);
      }
      std::cout << "wrote " << out.path().string() << '\n';
    } else if (*red) {
      const auto s = read_structure(r_input);
      const auto c = canonicalize(s, r_lambda);
      CsvWriter out(g.out / "reduce.csv", info, "lambda,mu,p0,p1,p,encoding_residual,report_residual,steps");
      out.row(r_lambda, c.structure.mu, c.structure.p0, c.structure.p1, c.structure.p,
              c.encoding_residual, c.report_residual, c.steps);
      std::cout << "wrote " << out.path().string() << " (residual " << c.report_residual << ")\n";
    } else if (*fitc) {
      auto obs = read_observations(f_input, f_trials);
      if (!f_raw) obs = symmetrize(obs);
      const auto f = fit_lambda(obs);
      CsvWriter out(g.out / "fit.csv", info, "lambda,coef_2lambda,std_error,z,p_value,separated");
      if (f.separated) {
        out.row("inf", "inf", "nan", "nan", "nan", 1);
      } else {
        const double l = f.lambda_hat.value();
        out.row(l, 2 * l, f.std_error, f.z_value, f.p_value, 0);
      }
      std::cout << "wrote " << out.path().string() << '\n';
    } else if (*sim) {
      const auto labels = parse_labels(labels_spec);
      if (study == "bayes") {
        BayesStudyConfig cfg;
        cfg.denominator = denominator;
        cfg.filter = filter == "observable" ? ScenarioFilter::kObservable : ScenarioFilter::kObservableInteriorPrior;
        cfg.trials = trials;
        cfg.seed = g.seed;
        cfg.labels = labels;
        write_bayes(run_bayes_study(cfg, simulated_decider()), labels, g, info);
      } else {
        McqaStudyConfig cfg;
        cfg.labels = labels;
        cfg.n_list = mc_n;
        cfg.responses = responses;
        cfg.replicates = replicates;
        cfg.seed = g.seed;
        write_mcqa(synthetic_mcqa_study(cfg, theta_star(), items, options), mc_n.size(), g, info);
      }
    } else if (*llm) {
      if (!mock && base_url.empty()) throw ValidationError("llm-run needs --base-url (or --mock)");
      EndpointConfig ep;
      ep.base_url = base_url;
      ep.model = mock ? "mock" : model;
      ep.api_key_env = key_env;
      std::unique_ptr<Transport> transport =
          mock ? std::unique_ptr<Transport>(std::make_unique<MockTransport>(mock_completion))
               : make_http_transport();
      fs::create_directories(g.out);
      ResponseCache cache(cache_path.empty() ? g.out / "llm_cache.jsonl" : cache_path);
      std::vector<ExpertLabel> labels;
      for (double t : temperatures) {
        std::ostringstream name;
        name << "t=" << t;
        labels.push_back({name.str(), RationalityLevel::infinite(), t});
      }
      std::mutex log_mutex;
      const auto log_parse = [&](const ParseError& e) {
        std::lock_guard lock(log_mutex);
        std::cerr << "excluded unparseable answer: " << e.what() << ": " << e.text() << '\n';
      };
      if (study == "bayes") {
        const std::string tmpl = load_text(prompts_dir / "bayes_decision.txt");
        BayesStudyConfig cfg;
        cfg.denominator = denominator;
        cfg.filter = filter == "observable" ? ScenarioFilter::kObservable : ScenarioFilter::kObservableInteriorPrior;
        cfg.trials = trials;
        cfg.seed = g.seed;
        cfg.labels = labels;
        cfg.max_in_flight = in_flight;
        const BinaryDecider decide = [&](const BoxBallScenario& s, const ExpertLabel& l, int trial,
                                         Rng&) -> std::optional<int> {
          const auto text = llm_query(ep, *transport, cache, bayes_prompt(tmpl, s), l.temperature, trial);
          try {
            return parse_answer(text, AnswerMode::kBinaryLR);
          } catch (const ParseError& e) {
            log_parse(e);
            return std::nullopt;
          }
        };
        write_bayes(run_bayes_study(cfg, decide), labels, g, info);
      } else {
        if (items_path.empty()) throw ValidationError("llm-run --study mcqa needs --items");
        const auto questions = read_items(items_path);
        const std::string tmpl = load_text(prompts_dir / "math_mcqa.txt");
        std::vector<ResponseSet> sets;
        std::map<std::string, std::string> prompts;
        for (const auto& q : questions) {
          sets.push_back({q.id, static_cast<int>(q.options.size()), {}, q.answer});
          prompts[q.id] = mcqa_prompt(tmpl, q);
        }
        McqaStudyConfig cfg;
        cfg.labels = labels;
        cfg.n_list = mc_n;
        cfg.responses = responses;
        cfg.replicates = replicates;
        cfg.seed = g.seed;
        cfg.max_in_flight = in_flight;
        const OptionDecider decide = [&](const ResponseSet& item, const ExpertLabel& l, int k,
                                         Rng&) -> std::optional<int> {
          const auto text = llm_query(ep, *transport, cache, prompts.at(item.item_id), l.temperature, k);
          try {
            return parse_answer(text, AnswerMode::kOptionLetter, item.option_count);
          } catch (const ParseError& e) {
            log_parse(e);
            return std::nullopt;
          }
        };
        write_mcqa(run_mcqa_study(cfg, sets, decide), mc_n.size(), g, info);
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const ServiceError& e) {
    std::cerr << "service error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
