#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "structrl/environments.hpp"
#include "structrl/mdp.hpp"

namespace structrl {

/// Raised for malformed model or experiment documents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BirthDeathSpec {
  std::size_t N = 2;
  double p = 0.5;
  double r = 1.0;
};

/// Kernel and reward tables given entry by entry.
struct ExplicitSpec {
  std::array<Matrix, kNumActions> kernel;
  Matrix reward;
  std::vector<std::array<bool, kNumActions>> feasible;
};

using ModelSpec = std::variant<BirthDeathSpec, KooleQueueConfig, ExplicitSpec>;

MdpModel build_model(const ModelSpec& spec);
/// Only the queue offers an exogenous-event view.
std::optional<EventDecomposition> build_events(const ModelSpec& spec);
std::string_view model_kind(const ModelSpec& spec);

/// Shortest text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text, std::string_view what);
std::vector<double> parse_double_list(std::string_view text, std::string_view what);
std::string format_double_list(const std::vector<double>& xs);

/// Reads/writes the keys of a [model] section.
ModelSpec read_model(const boost::property_tree::ptree& section);
boost::property_tree::ptree write_model(const ModelSpec& spec);

/// A document holding just a [model] section.
ModelSpec load_model_file(const std::filesystem::path& path);
void save_model_file(const std::filesystem::path& path, const ModelSpec& spec);

}  // namespace structrl
