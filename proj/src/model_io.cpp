#include "structrl/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

namespace structrl {

namespace pt = boost::property_tree;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string required(const pt::ptree& section, const std::string& key) {
  auto v = section.get_optional<std::string>(key);
  if (!v) throw ConfigError("model: missing key '" + key + "'");
  return boost::trim_copy(*v);
}

std::size_t parse_size(std::string_view text, std::string_view what) {
  std::size_t out = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(std::string(what) + ": expected a nonnegative integer, got '" +
                                                         std::string(text) + "'");
  return out;
}

Matrix parse_rows(const std::string& text, std::size_t n, const std::string& what) {
  std::vector<std::string> rows;
  boost::split(rows, text, boost::is_any_of(";"));
  if (rows.size() != n) throw ConfigError(what + ": expected " + std::to_string(n) + " rows separated by ';'");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = parse_double_list(rows[i], what);
    if (row.size() != n) throw ConfigError(what + ": row " + std::to_string(i) + " needs " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

std::string format_rows(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i > 0) out += "; ";
    std::vector<double> row;
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out += format_double_list(row);
  }
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("could not format a double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double out = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
  return out;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  std::vector<std::string> parts;
  const std::string s = boost::trim_copy(std::string(text));
  if (s.empty()) return {};
  boost::split(parts, s, boost::is_any_of(" \t,"), boost::token_compress_on);
  std::vector<double> out;
  out.reserve(parts.size());
  for (const auto& p : parts) out.push_back(parse_double(p, what));
  return out;
}

std::string format_double_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(xs[i]);
  }
  return out;
}

MdpModel build_model(const ModelSpec& spec) {
  try {
    return std::visit(Overloaded{
                          [](const BirthDeathSpec& s) { return build_birth_death_model(s.N, s.p, s.r); },
                          [](const KooleQueueConfig& s) { return koole_queue_model(s); },
                          [](const ExplicitSpec& s) { return MdpModel(s.kernel, s.reward, s.feasible); },
                      },
                      spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

std::optional<EventDecomposition> build_events(const ModelSpec& spec) {
  if (const auto* q = std::get_if<KooleQueueConfig>(&spec)) return koole_event_decomposition(*q);
  return std::nullopt;
}

std::string_view model_kind(const ModelSpec& spec) {
  return std::visit(Overloaded{
                        [](const BirthDeathSpec&) { return std::string_view("birth_death"); },
                        [](const KooleQueueConfig&) { return std::string_view("koole"); },
                        [](const ExplicitSpec&) { return std::string_view("explicit"); },
                    },
                    spec);
}

ModelSpec read_model(const pt::ptree& section) {
  const std::string kind = required(section, "kind");
  if (kind == "birth_death") {
    BirthDeathSpec s;
    s.N = parse_size(required(section, "N"), "model.N");
    s.p = parse_double(required(section, "p"), "model.p");
    s.r = parse_double(required(section, "r"), "model.r");
    return s;
  }
  if (kind == "koole") {
    KooleQueueConfig q = KooleQueueConfig::default_instance();
    if (auto v = section.get_optional<std::string>("capacity")) q.capacity = parse_size(boost::trim_copy(*v), "model.capacity");
    if (auto v = section.get_optional<std::string>("arrival_rate")) q.arrival_rate = parse_double(*v, "model.arrival_rate");
    if (auto v = section.get_optional<std::string>("service_rate")) q.service_rate = parse_double(*v, "model.service_rate");
    if (auto v = section.get_optional<std::string>("blocking_cost")) q.blocking_cost = parse_double(*v, "model.blocking_cost");
    if (auto v = section.get_optional<std::string>("holding_cost")) {
      q.holding_cost = parse_double_list(*v, "model.holding_cost");
    } else {
      const double coeff = parse_double(section.get<std::string>("holding_coeff", "0.1"), "model.holding_coeff");
      const double power = parse_double(section.get<std::string>("holding_power", "2"), "model.holding_power");
      q.holding_cost = KooleQueueConfig::power_holding(q.capacity, coeff, power);
    }
    try {
      q.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("model: ") + e.what());
    }
    return q;
  }
  if (kind == "explicit") {
    ExplicitSpec s;
    const std::size_t n = parse_size(required(section, "n_states"), "model.n_states");
    if (n == 0) throw ConfigError("model.n_states must be positive");
    s.kernel[0] = parse_rows(required(section, "kernel_a1"), n, "model.kernel_a1");
    s.kernel[1] = parse_rows(required(section, "kernel_a2"), n, "model.kernel_a2");
    const auto r1 = parse_double_list(required(section, "reward_a1"), "model.reward_a1");
    const auto r2 = parse_double_list(required(section, "reward_a2"), "model.reward_a2");
    if (r1.size() != n || r2.size() != n) throw ConfigError("model: reward lists need n_states entries");
    s.reward.resize(static_cast<Eigen::Index>(n), kNumActions);
    for (std::size_t i = 0; i < n; ++i) {
      s.reward(static_cast<Eigen::Index>(i), 0) = r1[i];
      s.reward(static_cast<Eigen::Index>(i), 1) = r2[i];
    }
    auto flags = [&](const std::string& key) {
      std::vector<bool> out(n, true);
      if (auto v = section.get_optional<std::string>(key)) {
        const auto xs = parse_double_list(*v, "model." + key);
        if (xs.size() != n) throw ConfigError("model." + key + " needs n_states entries");
        for (std::size_t i = 0; i < n; ++i) {
          if (xs[i] != 0.0 && xs[i] != 1.0) throw ConfigError("model." + key + " entries must be 0 or 1");
          out[i] = xs[i] == 1.0;
        }
      }
      return out;
    };
    const auto f1 = flags("feasible_a1");
    const auto f2 = flags("feasible_a2");
    s.feasible.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.feasible[i] = {f1[i], f2[i]};
    return s;
  }
  throw ConfigError("model.kind must be birth_death, koole or explicit, got '" + kind + "'");
}

pt::ptree write_model(const ModelSpec& spec) {
  pt::ptree out;
  out.put("kind", std::string(model_kind(spec)));
  std::visit(Overloaded{
                 [&](const BirthDeathSpec& s) {
                   out.put("N", std::to_string(s.N));
                   out.put("p", format_double(s.p));
                   out.put("r", format_double(s.r));
                 },
                 [&](const KooleQueueConfig& q) {
                   out.put("capacity", std::to_string(q.capacity));
                   out.put("arrival_rate", format_double(q.arrival_rate));
                   out.put("service_rate", format_double(q.service_rate));
                   out.put("blocking_cost", format_double(q.blocking_cost));
                   out.put("holding_cost", format_double_list(q.holding_cost));
                 },
                 [&](const ExplicitSpec& s) {
                   const auto n = static_cast<std::size_t>(s.reward.rows());
                   std::vector<double> r1, r2, f1, f2;
                   for (std::size_t i = 0; i < n; ++i) {
                     r1.push_back(s.reward(static_cast<Eigen::Index>(i), 0));
                     r2.push_back(s.reward(static_cast<Eigen::Index>(i), 1));
                     f1.push_back(s.feasible[i][0] ? 1.0 : 0.0);
                     f2.push_back(s.feasible[i][1] ? 1.0 : 0.0);
                   }
                   out.put("n_states", std::to_string(n));
                   out.put("kernel_a1", format_rows(s.kernel[0]));
                   out.put("kernel_a2", format_rows(s.kernel[1]));
                   out.put("reward_a1", format_double_list(r1));
                   out.put("reward_a2", format_double_list(r2));
                   out.put("feasible_a1", format_double_list(f1));
                   out.put("feasible_a2", format_double_list(f2));
                 },
             },
             spec);
  return out;
}

ModelSpec load_model_file(const std::filesystem::path& path) {
  pt::ptree doc;
  try {
    pt::read_ini(path.string(), doc);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  const auto section = doc.get_child_optional("model");
  if (!section) throw ConfigError(path.string() + ": no [model] section");
  return read_model(*section);
}

void save_model_file(const std::filesystem::path& path, const ModelSpec& spec) {
  pt::ptree doc;
  doc.add_child("model", write_model(spec));
  pt::write_ini(path.string(), doc);
}

}  // namespace structrl
