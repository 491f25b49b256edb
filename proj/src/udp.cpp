#include "rtcsim/udp.hpp"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cstring>

#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include "rtcsim/errors.hpp"

namespace rtcsim {

namespace {

template <typename U>
void
put_le (std::uint8_t *p, U v)
{
  for (std::size_t i = 0; i < sizeof (U); ++i)
    p[i] = static_cast<std::uint8_t> (v >> (8 * i));
}

template <typename U>
U
get_le (const std::uint8_t *p)
{
  U v = 0;
  for (std::size_t i = 0; i < sizeof (U); ++i)
    v |= static_cast<U> (p[i]) << (8 * i);
  return v;
}

} // namespace

std::array<std::uint8_t, kBsmDatagramSize>
encode (const BsmDatagram &d)
{
  std::array<std::uint8_t, kBsmDatagramSize> b{};
  put_le (b.data () + 0, kBsmMagic);
  put_le (b.data () + 4, d.vehicle_id);
  put_le (b.data () + 8, d.seq);
  put_le (b.data () + 12, std::bit_cast<std::uint64_t> (d.gen_time_s));
  put_le (b.data () + 20, std::bit_cast<std::uint64_t> (d.x_m));
  put_le (b.data () + 28, std::bit_cast<std::uint64_t> (d.y_m));
  put_le (b.data () + 36, std::bit_cast<std::uint32_t> (d.speed_mps));
  put_le (b.data () + 40, std::bit_cast<std::uint32_t> (d.heading_rad));
  put_le (b.data () + 44, std::bit_cast<std::uint32_t> (d.rss_dbm));
  return b;
}

BsmDatagram
decode (std::span<const std::uint8_t> bytes)
{
  if (bytes.size () != kBsmDatagramSize)
    throw ParseError (0, "datagram of " + std::to_string (bytes.size ()) + " bytes, expected "
                             + std::to_string (kBsmDatagramSize));
  const std::uint8_t *p = bytes.data ();
  if (get_le<std::uint32_t> (p) != kBsmMagic)
    throw ParseError (0, "bad datagram magic");
  BsmDatagram d;
  d.vehicle_id = get_le<std::uint32_t> (p + 4);
  d.seq = get_le<std::uint32_t> (p + 8);
  d.gen_time_s = std::bit_cast<double> (get_le<std::uint64_t> (p + 12));
  d.x_m = std::bit_cast<double> (get_le<std::uint64_t> (p + 20));
  d.y_m = std::bit_cast<double> (get_le<std::uint64_t> (p + 28));
  d.speed_mps = std::bit_cast<float> (get_le<std::uint32_t> (p + 36));
  d.heading_rad = std::bit_cast<float> (get_le<std::uint32_t> (p + 40));
  d.rss_dbm = std::bit_cast<float> (get_le<std::uint32_t> (p + 44));
  return d;
}

BsmDatagram
to_datagram (const TxEvent &event)
{
  const Transmission *w = event.outcome == Outcome::Decoded ? event.winner () : nullptr;
  if (w == nullptr)
    throw ValidationError ("to_datagram: event has no decoded winner");
  BsmDatagram d;
  d.vehicle_id = w->vehicle_id;
  d.seq = w->seq;
  d.gen_time_s = w->gen_time.to_seconds ();
  d.x_m = w->position.x_m;
  d.y_m = w->position.y_m;
  d.speed_mps = w->speed_mps;
  d.heading_rad = w->heading_rad;
  d.rss_dbm = static_cast<float> (w->rss_at_hv_dbm);
  return d;
}

std::string
UdpEndpoint::to_string () const
{
  return host + ":" + std::to_string (port);
}

UdpEndpoint
parse_endpoint (const std::string &text)
{
  const auto colon = text.rfind (':');
  if (colon == std::string::npos || colon == 0)
    throw ValidationError ("udp endpoint '" + text + "' is not host:port");
  const std::string port = text.substr (colon + 1);
  unsigned value = 0;
  const auto [ptr, ec] = std::from_chars (port.data (), port.data () + port.size (), value);
  if (ec != std::errc{} || ptr != port.data () + port.size () || value == 0 || value > 65535)
    throw ValidationError ("udp endpoint '" + text + "' has a bad port");
  return {text.substr (0, colon), static_cast<std::uint16_t> (value)};
}

UdpSink::UdpSink (const UdpEndpoint &endpoint) : m_name (endpoint.to_string ())
{
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo *res = nullptr;
  const std::string port = std::to_string (endpoint.port);
  if (const int rc = ::getaddrinfo (endpoint.host.c_str (), port.c_str (), &hints, &res); rc != 0)
    throw IoError (m_name, gai_strerror (rc));
  for (addrinfo *ai = res; ai != nullptr; ai = ai->ai_next)
    {
      m_fd = ::socket (ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (m_fd < 0)
        continue;
      // connected UDP: plain send() and ICMP errors surface on the socket
      if (::connect (m_fd, ai->ai_addr, ai->ai_addrlen) == 0)
        break;
      ::close (m_fd);
      m_fd = -1;
    }
  ::freeaddrinfo (res);
  if (m_fd < 0)
    throw IoError (m_name, "cannot open a UDP socket");
}

UdpSink::~UdpSink ()
{
  if (m_fd >= 0)
    ::close (m_fd);
}

void
UdpSink::deliver (const TxEvent &event)
{
  const auto bytes = encode (to_datagram (event));
  if (::send (m_fd, bytes.data (), bytes.size (), 0) != static_cast<ssize_t> (bytes.size ()))
    {
      // nobody listening (yet): the datagram is lost, as on air
      if (errno == ECONNREFUSED)
        {
          ++m_refused;
          return;
        }
      throw IoError (m_name, std::strerror (errno));
    }
  ++m_sent;
}

} // namespace rtcsim
