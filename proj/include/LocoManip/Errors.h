#pragma once

#include <stdexcept>
#include <string>

namespace locomanip
{

/** \brief Physically meaningless model parameters (e.g. CoM below the ZMP plane). */
class NonPhysicalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/** \brief ZMP scale kappa too small for the stabilizer gain scaling to be meaningful. */
class DegenerateScaleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidScheduleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class RiccatiDivergenceError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/** \brief The net CoP cannot be realized by the feet in support. */
class InfeasibleError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/** \brief Two traces cannot be compared (different columns, dt or duration). */
class SchemaMismatchError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

} // namespace locomanip
