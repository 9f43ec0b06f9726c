#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "dpgnn/io.hpp"
#include <fmt/format.h>

namespace dpgnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("config: bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace

void apply_config_value(TrainConfig& c, std::string_view key, std::string_view value) {
  if (key == "top_k") c.top_k = parse_number<std::size_t>(key, value);
  else if (key == "hops_topo") c.hops_topo = parse_number<std::size_t>(key, value);
  else if (key == "hops_feat") c.hops_feat = parse_number<std::size_t>(key, value);
  else if (key == "samples") c.samples = parse_number<std::size_t>(key, value);
  else if (key == "temperature") c.temperature = parse_number<double>(key, value);
  else if (key == "lambda") c.lambda = parse_number<double>(key, value);
  else if (key == "dropout") c.dropout = parse_number<double>(key, value);
  else if (key == "hidden_dim") c.hidden_dim = parse_number<std::size_t>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "weight_decay") c.weight_decay = parse_number<double>(key, value);
  else if (key == "patience") c.patience = parse_number<std::size_t>(key, value);
  else if (key == "max_epochs") c.max_epochs = parse_number<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "aggregator") c.aggregator = parse_aggregator(value);
  else if (key == "mode") c.mode = parse_mode(value);
  else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

std::string serialize_config(const TrainConfig& c) {
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{}={}\n", key, value); };
  line("top_k", c.top_k);
  line("hops_topo", c.hops_topo);
  line("hops_feat", c.hops_feat);
  line("samples", c.samples);
  line("temperature", c.temperature);
  line("lambda", c.lambda);
  line("dropout", c.dropout);
  line("hidden_dim", c.hidden_dim);
  line("learning_rate", c.learning_rate);
  line("weight_decay", c.weight_decay);
  line("patience", c.patience);
  line("max_epochs", c.max_epochs);
  line("seed", c.seed);
  line("aggregator", to_string(c.aggregator));
  line("mode", to_string(c.mode));
  return out;
}

TrainConfig parse_config(std::string_view text) {
  TrainConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void save_config(const TrainConfig& config, const std::filesystem::path& path) {
  write_text_file(path, serialize_config(config));
}

}  // namespace dpgnn
