#include "ddl/cli.hpp"

#include "ddl/classify.hpp"
#include "ddl/dataio.hpp"
#include "ddl/deep.hpp"
#include "ddl/error.hpp"
#include "ddl/persist.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ddl::cli {
namespace {

namespace fs = std::filesystem;

// Raised for flag combinations CLI11 cannot express; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataFlags {
  std::string data;
  std::string labels;
  std::string format;
  Index limit = 0;
};

struct HyperFlags {
  double lambda = 0.1;
  int dense_iters = 10;
  int sparse_iters = 15;
  int ista_iters = 50;
  double rel_tol = 1e-4;
  double step_safety = 1.01;
};

struct Dataset {
  SampleMatrix samples;
  std::optional<LabelVector> labels;
};

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

std::string scientific(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6e", value);
  return buf;
}

std::vector<Index> parse_layers(const std::string& text) {
  std::vector<Index> sizes;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t used = 0;
    long long value = 0;
    try {
      value = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--layers: '" + item + "' is not an integer");
    }
    if (used != item.size() || value < 1) throw UsageError("--layers: '" + item + "' is not a positive integer");
    sizes.push_back(static_cast<Index>(value));
  }
  if (sizes.empty()) throw UsageError("--layers needs at least one size");
  return sizes;
}

std::string chain_name(const std::vector<Index>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) out += (i ? "-" : "") + std::to_string(sizes[i]);
  return out;
}

std::string resolve_format(const std::string& format, const std::string& path) {
  if (!format.empty()) return format;
  return fs::path(path).extension() == ".amat" ? "amat" : "idx";
}

Dataset load_dataset(const std::string& path, const std::string& labels_path,
                     const std::string& format_flag, Index limit) {
  Dataset data;
  const std::string format = resolve_format(format_flag, path);
  if (format == "amat") {
    if (!labels_path.empty()) throw UsageError("amat files carry their own labels; drop the labels flag");
    auto parsed = dataio::read_amat(path);
    data.samples = std::move(parsed.samples);
    data.labels = std::move(parsed.labels);
  } else {
    data.samples = dataio::read_idx_images(path);
    if (!labels_path.empty()) {
      data.labels = dataio::read_idx_labels(labels_path);
      dataio::check_paired(data.samples, *data.labels);
    }
  }
  if (limit > 0 && limit < data.samples.cols()) {
    data.samples = data.samples.leftCols(limit).eval();
    if (data.labels) data.labels->resize(static_cast<std::size_t>(limit));
  }
  return data;
}

void add_data_flags(CLI::App* cmd, DataFlags& flags, bool required, const std::string& prefix = "") {
  auto* data = cmd->add_option("--" + prefix + "data", flags.data, "IDX image file or amat file");
  if (required) data->required();
  cmd->add_option("--" + prefix + "labels", flags.labels, "IDX label file (idx format only)");
  cmd->add_option("--" + prefix + "format", flags.format,
                  "idx or amat (default: from the file extension)")
      ->check(CLI::IsMember({"idx", "amat"}));
  cmd->add_option("--" + prefix + "limit", flags.limit, "use only the first N samples")
      ->check(CLI::NonNegativeNumber);
}

void add_hyper_flags(CLI::App* cmd, HyperFlags& flags) {
  cmd->add_option("--lambda", flags.lambda, "sparse penalty of the final layer")->check(CLI::PositiveNumber);
  cmd->add_option("--dense-iters", flags.dense_iters, "outer rounds per dense layer")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sparse-iters", flags.sparse_iters, "outer rounds per sparse layer")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--ista-iters", flags.ista_iters, "ISTA sweeps per coding step")->check(CLI::PositiveNumber);
  cmd->add_option("--rel-tol", flags.rel_tol, "stop when the relative objective decrease falls below this")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--step-safety", flags.step_safety, "ISTA step multiplier on sigma_max^2 (> 1)");
}

deep::DeepTrainConfig make_config(const std::vector<Index>& sizes, const HyperFlags& h) {
  deep::DeepTrainConfig config;
  config.layer_sizes = sizes;
  for (auto* c : {&config.dense, &config.sparse}) {
    c->lambda = h.lambda;
    c->ista_iters = h.ista_iters;
    c->rel_tol = h.rel_tol;
    c->step_safety = h.step_safety;
  }
  config.dense.outer_iters = h.dense_iters;
  config.sparse.outer_iters = h.sparse_iters;
  config.dense.validate();
  config.sparse.validate();
  return config;
}

void print_reports(std::ostream& out, const std::vector<deep::LayerReport>& reports) {
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << "layer " << i + 1 << "\tatoms " << r.atoms << "\t" << to_string(r.kind) << "\tobjective "
        << scientific(r.objective) << "\trounds " << r.rounds << "\ttime " << fixed(r.seconds, 3) << " s\n";
  }
}

double total_seconds(const std::vector<deep::LayerReport>& reports) {
  double total = 0.0;
  for (const auto& r : reports) total += r.seconds;
  return total;
}

// Expands `--config FILE` into flags placed right after the subcommand so
// that flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.rfind("--", 0) == 0) key = key.substr(2);
      from_file.push_back("--" + key);
      from_file.push_back(value);
    }
  }
  if (from_file.empty() || rest.empty()) return rest;
  std::vector<std::string> merged{rest.front()};
  merged.insert(merged.end(), from_file.begin(), from_file.end());
  merged.insert(merged.end(), rest.begin() + 1, rest.end());
  return merged;
}

int cmd_train(const DataFlags& data_flags, const std::string& layers, const HyperFlags& hyper,
              const std::string& out_path, std::ostream& out) {
  const auto sizes = parse_layers(layers);
  const auto config = make_config(sizes, hyper);
  const Dataset data = load_dataset(data_flags.data, data_flags.labels, data_flags.format, data_flags.limit);
  deep::check_layer_chain(data.samples, sizes);

  const auto result = deep::train_deep(data.samples, config);
  persist::save_model(result.model, out_path);

  print_reports(out, result.reports);
  out << "training time " << fixed(total_seconds(result.reports), 3) << " s\n";
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_encode(const DataFlags& data_flags, const std::string& model_path, const std::string& out_path,
               std::ostream& out) {
  const auto model = persist::load_model(model_path);
  const Dataset data = load_dataset(data_flags.data, data_flags.labels, data_flags.format, data_flags.limit);
  if (data.samples.rows() != model.input_dim) {
    throw DimensionError("data has " + std::to_string(data.samples.rows()) +
                         " dimensions but the model expects " + std::to_string(model.input_dim));
  }
  const auto features = deep::encode(model, data.samples);
  persist::save_features(features, data.labels, out_path);
  out << "encoded " << features.cols() << " samples into " << features.rows() << " features\n";
  out << "wrote " << out_path << "\n";
  return kExitOk;
}

persist::FeatureSet load_labeled_features(const std::string& path, const std::string& labels_path) {
  auto set = persist::load_features(path);
  if (!labels_path.empty()) set.labels = dataio::read_idx_labels(labels_path);
  if (!set.labels) throw FormatError(path + " has no labels; pass a label file");
  dataio::check_paired(set.features, *set.labels);
  return set;
}

int cmd_eval_knn(const std::string& train_path, const std::string& train_labels,
                 const std::string& test_path, const std::string& test_labels, std::ostream& out) {
  const auto train = load_labeled_features(train_path, train_labels);
  const auto test = load_labeled_features(test_path, test_labels);
  const auto report = classify::evaluate_knn1(train.features, *train.labels, test.features, *test.labels);
  out << "accuracy " << fixed(100.0 * report.accuracy, 2) << "\terrors " << report.num_errors << "/"
      << report.num_test << "\n";
  return kExitOk;
}

struct CompareFlags {
  DataFlags train;
  DataFlags test;
  std::string layers;
  Index shallow = 50;
  std::string shallow_kind = "sparse";
  Index holdout = 0;
  std::string name;
  std::string save_dir;
};

int cmd_compare(const CompareFlags& flags, const HyperFlags& hyper, std::ostream& out, std::ostream& err) {
  const auto deep_sizes = parse_layers(flags.layers);
  const std::vector<Index> shallow_sizes{flags.shallow};
  auto deep_config = make_config(deep_sizes, hyper);
  auto shallow_config = make_config(shallow_sizes, hyper);
  shallow_config.kinds = std::vector<LayerKind>{flags.shallow_kind == "dense" ? LayerKind::Dense : LayerKind::Sparse};

  Dataset train = load_dataset(flags.train.data, flags.train.labels, flags.train.format, flags.train.limit);
  Dataset test;
  if (!flags.test.data.empty()) {
    test = load_dataset(flags.test.data, flags.test.labels, flags.test.format, flags.test.limit);
  } else {
    // Hold out the last samples of the training file.
    const Index total = train.samples.cols();
    const Index holdout = flags.holdout > 0 ? flags.holdout : total / 5;
    if (holdout < 1 || holdout >= total) throw UsageError("--holdout must leave both splits non-empty");
    test.samples = train.samples.rightCols(holdout).eval();
    train.samples = train.samples.leftCols(total - holdout).eval();
    if (train.labels) {
      test.labels = LabelVector(train.labels->end() - holdout, train.labels->end());
      train.labels->resize(static_cast<std::size_t>(total - holdout));
    }
  }
  if (!train.labels || !test.labels) throw UsageError("compare needs labels for both splits");
  if (test.samples.rows() != train.samples.rows()) {
    throw DimensionError("train data has " + std::to_string(train.samples.rows()) +
                         " dimensions, test data " + std::to_string(test.samples.rows()));
  }
  deep::check_layer_chain(train.samples, deep_sizes);
  deep::check_layer_chain(train.samples, shallow_sizes);

  struct Arm {
    std::string tag;
    deep::TrainResult trained;
    Coefficients train_features;
    Coefficients test_features;
    classify::EvalReport report;
  };
  std::vector<Arm> arms;
  for (const auto& [tag, config] : {std::pair{std::string("deep"), deep_config},
                                    std::pair{std::string("shallow"), shallow_config}}) {
    Arm arm;
    arm.tag = tag;
    arm.trained = deep::train_deep(train.samples, config);
    arm.train_features = deep::encode(arm.trained.model, train.samples);
    arm.test_features = deep::encode(arm.trained.model, test.samples);
    arm.report = classify::evaluate_knn1(arm.train_features, *train.labels, arm.test_features, *test.labels);
    err << tag << " training time " << fixed(total_seconds(arm.trained.reports), 3) << " s, 1-NN time "
        << fixed(arm.report.elapsed_seconds, 3) << " s\n";
    arms.push_back(std::move(arm));
  }

  if (!flags.save_dir.empty()) {
    fs::create_directories(flags.save_dir);
    const fs::path dir(flags.save_dir);
    for (const auto& arm : arms) {
      persist::save_model(arm.trained.model, dir / (arm.tag + ".ddl"));
      persist::save_features(arm.train_features, train.labels, dir / (arm.tag + "_train.ddf"));
      persist::save_features(arm.test_features, test.labels, dir / (arm.tag + "_test.ddf"));
    }
  }

  const std::string name = flags.name.empty() ? fs::path(flags.train.data).stem().string() : flags.name;
  err << "dataset\tdeep(" << chain_name(deep_sizes) << ")\tshallow(" << flags.shallow << ")\n";
  out << name << "\t" << fixed(100.0 * arms[0].report.accuracy, 2) << "\t"
      << fixed(100.0 * arms[1].report.accuracy, 2) << "\n";
  return kExitOk;
}

int cmd_info(const std::string& path, std::ostream& out) {
  const auto header = persist::read_header(path);
  const std::string type = header.value("type", std::string("unknown"));
  if (type == "model") {
    const auto model = persist::load_model(path);
    out << "type\tmodel\n";
    out << "format_version\t" << header.at("format_version").get<int>() << "\n";
    out << "input_dim\t" << model.input_dim << "\n";
    out << "chain\t" << model.input_dim;
    for (const auto& layer : model.layers) out << " -> " << layer.dictionary.cols();
    out << "\n";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
      const auto& d = model.layers[i].dictionary;
      out << "layer " << i + 1 << "\t" << d.rows() << "x" << d.cols() << "\t" << to_string(model.layers[i].kind)
          << "\n";
    }
    out << "lambda\t" << header.at("lambda").dump() << "\n";
    out << "ista_iters\t" << model.ista_iters << "\n";
    out << "step_safety\t" << header.at("step_safety").dump() << "\n";
  } else if (type == "features") {
    const auto set = persist::load_features(path);
    out << "type\tfeatures\n";
    out << "format_version\t" << header.at("format_version").get<int>() << "\n";
    out << "shape\t" << set.features.rows() << "x" << set.features.cols() << "\n";
    out << "labels\t" << (set.labels ? "yes" : "no") << "\n";
  } else {
    throw FormatError("unknown file type '" + type + "'");
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy deep dictionary learning with 1-NN evaluation", "ddl"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");
  app.add_option("--config", "key=value file whose entries mirror flag names (flags win)");

  DataFlags data_flags;
  HyperFlags hyper;
  std::string layers;
  std::string out_path;
  std::string model_path;

  auto* train = app.add_subcommand("train", "train a deep dictionary model");
  add_data_flags(train, data_flags, true);
  train->add_option("--layers", layers, "comma separated atom counts, e.g. 300,150,50")->required();
  add_hyper_flags(train, hyper);
  train->add_option("--out", out_path, "model file to write")->required();

  auto* encode = app.add_subcommand("encode", "encode samples through a trained model");
  add_data_flags(encode, data_flags, true);
  encode->add_option("--model", model_path, "model file")->required();
  encode->add_option("--out", out_path, "feature file to write")->required();

  std::string train_features, train_labels, test_features, test_labels;
  auto* eval = app.add_subcommand("eval-knn", "1-NN accuracy of test features against train features");
  eval->add_option("--train", train_features, "training feature file")->required();
  eval->add_option("--test", test_features, "test feature file")->required();
  eval->add_option("--train-labels", train_labels, "IDX labels overriding the feature file's");
  eval->add_option("--test-labels", test_labels, "IDX labels overriding the feature file's");

  CompareFlags compare_flags;
  auto* compare = app.add_subcommand("compare", "deep vs shallow dictionary features under 1-NN");
  add_data_flags(compare, compare_flags.train, true);
  add_data_flags(compare, compare_flags.test, false, "test-");
  compare->add_option("--layers", compare_flags.layers, "deep chain, e.g. 300,150,50")->required();
  compare->add_option("--shallow", compare_flags.shallow, "atom count of the shallow baseline")
      ->check(CLI::PositiveNumber);
  compare->add_option("--shallow-kind", compare_flags.shallow_kind, "sparse or dense shallow learning")
      ->check(CLI::IsMember({"sparse", "dense"}));
  compare->add_option("--holdout", compare_flags.holdout,
                      "without --test-data, hold out this many trailing samples (default 20%)")
      ->check(CLI::NonNegativeNumber);
  compare->add_option("--name", compare_flags.name, "dataset name for the table (default: file stem)");
  compare->add_option("--save-dir", compare_flags.save_dir, "directory for models and feature files");
  add_hyper_flags(compare, hyper);

  std::string info_path;
  auto* info = app.add_subcommand("info", "describe a model or feature file");
  info->add_option("file", info_path, "model or feature file")->required();

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(data_flags, layers, hyper, out_path, out);
    if (*encode) return cmd_encode(data_flags, model_path, out_path, out);
    if (*eval) return cmd_eval_knn(train_features, train_labels, test_features, test_labels, out);
    if (*compare) return cmd_compare(compare_flags, hyper, out, err);
    if (*info) return cmd_info(info_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace ddl::cli
