#pragma once

#include <stdexcept>
#include <string>

namespace fl {

// Base for every library error; `what()` carries the human message.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FL_DEFINE_ERROR(Name)                              \
    class Name : public Error {                            \
    public:                                                \
        explicit Name(const std::string& msg)              \
            : Error(std::string(#Name ": ") + msg) {}      \
    };

FL_DEFINE_ERROR(DegenerateElement)
FL_DEFINE_ERROR(MeshError)
FL_DEFINE_ERROR(ResourceLimit)
FL_DEFINE_ERROR(InvalidOrder)
FL_DEFINE_ERROR(InvalidParameter)
FL_DEFINE_ERROR(AlignmentError)
FL_DEFINE_ERROR(WrongCase)
FL_DEFINE_ERROR(SolverError)
FL_DEFINE_ERROR(ConsistencyError)
FL_DEFINE_ERROR(OutOfDomain)
FL_DEFINE_ERROR(OracleUnstable)
FL_DEFINE_ERROR(IntegrandError)
FL_DEFINE_ERROR(IoError)

#undef FL_DEFINE_ERROR

class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line)
        : Error("ParseError (line " + std::to_string(line) + "): " + msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class ExponentMismatch : public Error {
public:
    ExponentMismatch(const std::string& kind, const std::string& table, const std::string& audit)
        : Error("ExponentMismatch [" + kind + "]: table " + table + " vs audit " + audit),
          table_(table), audit_(audit) {}
    const std::string& table() const { return table_; }
    const std::string& audit() const { return audit_; }

private:
    std::string table_, audit_;
};

}  // namespace fl
