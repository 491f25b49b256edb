#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtcsim/channel.hpp"
#include "rtcsim/mac.hpp"
#include "rtcsim/scenario.hpp"
#include "rtcsim/udp.hpp"

namespace rtcsim {

enum class RunMode { Batch, Realtime };

std::string_view to_string (RunMode mode);
RunMode parse_run_mode (std::string_view name);

struct ThreeLogParams
{
  double d0_m = 1.0;
  double d1_m = 200.0;
  double d2_m = 500.0;
  double n0 = 1.9;
  double n1 = 3.8;
  double n2 = 3.8;
  double ref_loss_db = 46.6777;

  bool operator== (const ThreeLogParams &) const = default;
};

struct FowlervilleParams
{
  std::vector<double> boundaries_m{1.0, 80.0, 400.0};
  std::vector<double> exponents{1.8, 2.5, 3.0};
  double ref_loss_db = 47.86;
  double shadowing_sigma_db = 3.0;
  std::uint64_t shadowing_seed = 1;

  bool operator== (const FowlervilleParams &) const = default;
};

/// Everything one process run needs. Defaults mirror config/rtcsim.ini.
struct RunConfig
{
  TopologySpec topology;
  double speed_mps = 20.0;
  /// Scenario directory written by `gen`; when set it replaces the topology.
  std::optional<std::filesystem::path> trace_dir;

  std::string channel = "fowlerville"; ///< "fowlerville" or "three_log_distance"
  ThreeLogParams three_log;
  FowlervilleParams fowlerville;
  RadioConfig radio;
  MacParams mac;

  double duration_s = 20.0;
  std::uint64_t seed = 42;
  RunMode mode = RunMode::Batch;
  std::filesystem::path out = "out";
  std::optional<UdpEndpoint> emit_udp;
  bool null_sink = false;
  bool hv_transmits = true;
  double realtime_speed = 1.0;

  double cbp_window_s = 0.1;
  double per_bin_m = 25.0;
  double per_max_m = 400.0;

  /// The selected channel profile.
  PathLossModel channel_model () const;
  void validate () const;
  bool operator== (const RunConfig &) const = default;
};

/// Flat "section.key" -> raw value view of a config document.
using Settings = std::map<std::string, std::string>;

/// INI text to Settings. Throws ParseError.
Settings read_settings (std::istream &in);
Settings read_settings (const std::filesystem::path &path);

/// Applies `key=value` to `settings`. Throws ValidationError when malformed.
void add_override (Settings &settings, const std::string &assignment);

/// Applies settings over `config`. Unknown keys and unparsable values throw
/// ValidationError naming the key.
void apply_settings (RunConfig &config, const Settings &settings);

/// Defaults, then the file, then the overrides in order. Validates.
RunConfig load_config (const std::optional<std::filesystem::path> &file, const std::vector<std::string> &overrides);

/// Complete INI document for `config`; read_settings + apply_settings on it
/// reproduces `config`.
std::string dump_config (const RunConfig &config);

/// Every key apply_settings understands, in document order.
std::vector<std::string> known_keys ();

} // namespace rtcsim
