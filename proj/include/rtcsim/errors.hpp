#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rtcsim {

/// Input violates a documented precondition or type invariant.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `line()` is the 1-based physical line number.
class ParseError : public std::runtime_error
{
public:
  ParseError (std::size_t line, const std::string &what)
    : std::runtime_error ("line " + std::to_string (line) + ": " + what),
      m_line (line)
  {
  }
  std::size_t line () const { return m_line; }

private:
  std::size_t m_line;
};

class IoError : public std::runtime_error
{
public:
  IoError (const std::string &path, const std::string &what)
    : std::runtime_error (path + ": " + what),
      m_path (path)
  {
  }
  const std::string &path () const { return m_path; }

private:
  std::string m_path;
};

/// A scheduler invariant tripped at run time (ordering, conservation, ...).
class InvariantError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Real-time delivery fell behind the wall clock by more than the budget.
class RealtimeViolation : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace rtcsim
