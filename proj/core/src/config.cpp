#include "mfood/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mfood/errors.hpp"
#include "text_util.hpp"

namespace mfood {
namespace {

using detail::format_double;

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    const auto t = detail::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += fmt(items[i]);
  }
  return out;
}

struct KeyHandler {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::size_t as_size(const std::string& v, const std::string& key) {
  return static_cast<std::size_t>(detail::parse_u64(v, key));
}

const std::vector<std::pair<std::string, KeyHandler>>& handlers() {
  using C = ExperimentConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, KeyHandler>> table = {
      {"dims.D", {[](C& c, S v, S k) { c.ambient_dim = as_size(v, k); },
                  [](const C& c) { return std::to_string(c.ambient_dim); }}},
      {"dims.d", {[](C& c, S v, S k) { c.manifold_dim = as_size(v, k); },
                  [](const C& c) { return std::to_string(c.manifold_dim); }}},
      {"penalty.kind", {[](C& c, S v, S) { c.penalty_kind = parse_penalty_kind(v); },
                        [](const C& c) { return to_string(c.penalty_kind); }}},
      {"penalty.delta", {[](C& c, S v, S k) { c.penalty_delta = detail::parse_double(v, k); },
                         [](const C& c) { return format_double(c.penalty_delta); }}},
      {"penalty.lambda", {[](C& c, S v, S k) { c.penalty_lambda = detail::parse_double(v, k); },
                          [](const C& c) { return format_double(c.penalty_lambda); }}},
      {"optim.lr", {[](C& c, S v, S k) { c.learning_rate = detail::parse_double(v, k); },
                    [](const C& c) { return format_double(c.learning_rate); }}},
      {"optim.batch", {[](C& c, S v, S k) { c.batch_size = as_size(v, k); },
                       [](const C& c) { return std::to_string(c.batch_size); }}},
      {"optim.epochs", {[](C& c, S v, S k) { c.epochs = as_size(v, k); },
                        [](const C& c) { return std::to_string(c.epochs); }}},
      {"seed", {[](C& c, S v, S k) { c.seed = detail::parse_u64(v, k); },
                [](const C& c) { return std::to_string(c.seed); }}},
      {"data.path", {[](C& c, S v, S) { c.data_path = v; },
                     [](const C& c) { return c.data_path; }}},
      {"checkpoint.path", {[](C& c, S v, S) { c.checkpoint_path = v; },
                           [](const C& c) { return c.checkpoint_path; }}},
      {"manifold_flow.enabled", {[](C& c, S v, S k) { c.manifold_flow_enabled = parse_bool(v, k); },
                                 [](const C& c) { return std::string(c.manifold_flow_enabled ? "true" : "false"); }}},
      {"manifold_flow.blocks", {[](C& c, S v, S k) { c.manifold_flow_blocks = as_size(v, k); },
                                [](const C& c) { return std::to_string(c.manifold_flow_blocks); }}},
      {"flow.blocks", {[](C& c, S v, S k) { c.flow_blocks = as_size(v, k); },
                       [](const C& c) { return std::to_string(c.flow_blocks); }}},
      {"flow.hidden", {[](C& c, S v, S k) {
                         c.flow_hidden.clear();
                         for (const auto& item : split_list(v)) c.flow_hidden.push_back(as_size(item, k));
                       },
                       [](const C& c) {
                         return join(c.flow_hidden, [](std::size_t w) { return std::to_string(w); });
                       }}},
      {"flow.scale_clamp", {[](C& c, S v, S k) { c.flow_scale_clamp = detail::parse_double(v, k); },
                            [](const C& c) { return format_double(c.flow_scale_clamp); }}},
      {"flow.permute", {[](C& c, S v, S k) { c.flow_permute = parse_bool(v, k); },
                        [](const C& c) { return std::string(c.flow_permute ? "true" : "false"); }}},
      {"eval.id_path", {[](C& c, S v, S) { c.eval_id_path = v; },
                        [](const C& c) { return c.eval_id_path; }}},
      {"eval.ood_paths", {[](C& c, S v, S) { c.eval_ood_paths = split_list(v); },
                          [](const C& c) {
                            return join(c.eval_ood_paths, [](const std::string& s) { return s; });
                          }}},
      {"score.use_ic", {[](C& c, S v, S k) { c.score_use_ic = parse_bool(v, k); },
                        [](const C& c) { return std::string(c.score_use_ic ? "true" : "false"); }}},
      {"score.c_const", {[](C& c, S v, S k) { c.score_c_const = detail::parse_double(v, k); },
                         [](const C& c) { return format_double(c.score_c_const); }}},
      {"output.dir", {[](C& c, S v, S) { c.output_dir = v; },
                      [](const C& c) { return c.output_dir; }}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, h] : handlers()) k.push_back(name);
    return k;
  }();
  return out;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  std::map<std::string, const KeyHandler*> lookup;
  for (const auto& [name, h] : handlers()) lookup[name] = &h;
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(t.substr(0, eq)));
    const std::string value(detail::trim(t.substr(eq + 1)));
    const auto it = lookup.find(key);
    if (it == lookup.end()) throw ConfigError("unknown config key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");
    it->second->set(cfg, value, key);
  }
  cfg.split().validate();
  cfg.penalty().validate();
  if (cfg.batch_size == 0) throw ConfigError("optim.batch must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("optim.lr must be positive");
  if (cfg.flow_blocks == 0) throw ConfigError("flow.blocks must be positive");
  if (!(cfg.score_c_const > 0.0)) throw ConfigError("score.c_const must be positive");
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::echo() const {
  std::string out;
  for (const auto& [name, h] : handlers()) {
    const std::string value = h.get(*this);
    out += value.empty() ? name + " =\n" : name + " = " + value + "\n";
  }
  return out;
}

PenaltySpec ExperimentConfig::penalty() const {
  return {penalty_kind, penalty_delta, penalty_lambda};
}

FlowConfig ExperimentConfig::flow_config() const {
  return {flow_blocks, flow_hidden, flow_scale_clamp, flow_permute};
}

FlowConfig ExperimentConfig::manifold_flow_config() const {
  return {manifold_flow_blocks, flow_hidden, flow_scale_clamp, flow_permute};
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.penalty = penalty();
  t.optimizer.learning_rate = learning_rate;
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.seed = seed;
  if (!checkpoint_path.empty()) t.checkpoint_path = checkpoint_path;
  return t;
}

LatentSplit ExperimentConfig::split() const { return {manifold_dim, ambient_dim}; }

ManifoldFlowModel ExperimentConfig::build_model() const {
  ManifoldFlowModel m;
  m.split = split();
  m.split.validate();
  m.base = FlowModel::build(ambient_dim, flow_config(), seed);
  if (manifold_flow_enabled) {
    m.manifold_flow = FlowModel::build(manifold_dim, manifold_flow_config(), seed + 1);
  }
  return m;
}

}  // namespace mfood
