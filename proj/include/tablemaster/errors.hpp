#pragma once

#include <stdexcept>
#include <string>

namespace tablemaster {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TABLEMASTER_DEFINE_ERROR(Name, Base) \
  class Name : public Base {                 \
   public:                                   \
    using Base::Base;                        \
  };

TABLEMASTER_DEFINE_ERROR(ParseError, Error)
TABLEMASTER_DEFINE_ERROR(ShapeError, Error)
TABLEMASTER_DEFINE_ERROR(TransposeError, Error)
TABLEMASTER_DEFINE_ERROR(IndexError, Error)
TABLEMASTER_DEFINE_ERROR(ConfigError, Error)

}  // namespace tablemaster
