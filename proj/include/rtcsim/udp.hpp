#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "rtcsim/realtime.hpp"

namespace rtcsim {

inline constexpr std::uint32_t kBsmMagic = 0x42534D31;
inline constexpr std::size_t kBsmDatagramSize = 48;

/// One decoded BSM as sent to a device under test.
///
/// Wire layout, little-endian, no padding:
///   0 u32 magic, 4 u32 vehicle_id, 8 u32 seq, 12 f64 gen_time_s,
///   20 f64 x_m, 28 f64 y_m, 36 f32 speed_mps, 40 f32 heading_rad,
///   44 f32 rss_dbm.
struct BsmDatagram
{
  std::uint32_t vehicle_id = 0;
  std::uint32_t seq = 0;
  double gen_time_s = 0.0;
  double x_m = 0.0;
  double y_m = 0.0;
  float speed_mps = 0.0F;
  float heading_rad = 0.0F;
  float rss_dbm = 0.0F;

  bool operator== (const BsmDatagram &) const = default;
};

std::array<std::uint8_t, kBsmDatagramSize> encode (const BsmDatagram &d);
/// Throws ParseError (line 0) on a wrong size or magic.
BsmDatagram decode (std::span<const std::uint8_t> bytes);

/// Datagram for the winner of a Decoded event. Throws ValidationError for
/// any other outcome.
BsmDatagram to_datagram (const TxEvent &event);

struct UdpEndpoint
{
  std::string host;
  std::uint16_t port = 0;

  std::string to_string () const;
  bool operator== (const UdpEndpoint &) const = default;
};

/// Parses "host:port". Throws ValidationError.
UdpEndpoint parse_endpoint (const std::string &text);

/// Sends one datagram per delivered event. Throws IoError when the socket
/// cannot be set up or a send fails for a reason other than a refused port.
class UdpSink final : public EventSink
{
public:
  explicit UdpSink (const UdpEndpoint &endpoint);
  ~UdpSink () override;
  UdpSink (const UdpSink &) = delete;
  UdpSink &operator= (const UdpSink &) = delete;

  void deliver (const TxEvent &event) override;
  std::uint64_t sent () const { return m_sent; }
  /// sends rejected because no socket was listening
  std::uint64_t refused () const { return m_refused; }

private:
  int m_fd = -1;
  std::string m_name;
  std::uint64_t m_sent = 0;
  std::uint64_t m_refused = 0;
};

} // namespace rtcsim
