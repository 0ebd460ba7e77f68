#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "hopfinf/geometry.hpp"

namespace hopfinf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Point at or inside the excluded disk.
class DomainViolation : public Error {
 public:
  DomainViolation(Vec2 z, double sigma);
  Vec2 point() const { return point_; }

 private:
  Vec2 point_;
};

class NonFiniteValue : public Error {
 public:
  explicit NonFiniteValue(Vec2 z);
  Vec2 point() const { return point_; }

 private:
  Vec2 point_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class WindingUndefined : public Error {
 public:
  using Error::Error;
};

class LocateError : public Error {
 public:
  using Error::Error;
};

}  // namespace hopfinf
