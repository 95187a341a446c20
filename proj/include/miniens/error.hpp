#pragma once

#include <stdexcept>
#include <string>

namespace miniens {

// Error category, mapped to CLI exit codes: usage/config -> 1, data -> 2,
// numeric failure -> 3.
enum class ErrorKind {
    usage = 1,
    data = 2,
    numeric = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), kind_(kind), name_(std::move(name)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

#define MINIENS_DEFINE_ERROR(Name, Kind)                             \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& message)                    \
            : Error(ErrorKind::Kind, #Name, message) {}              \
    }

MINIENS_DEFINE_ERROR(ShapeMismatch, usage);
MINIENS_DEFINE_ERROR(GraphDetached, usage);
MINIENS_DEFINE_ERROR(ConfigMismatch, usage);
MINIENS_DEFINE_ERROR(UnknownLanguage, usage);
MINIENS_DEFINE_ERROR(EmptyPredictionList, usage);
MINIENS_DEFINE_ERROR(LengthMismatch, usage);
MINIENS_DEFINE_ERROR(EmptyEvaluation, usage);
MINIENS_DEFINE_ERROR(InvalidArgument, usage);

MINIENS_DEFINE_ERROR(EmptyCorpus, data);
MINIENS_DEFINE_ERROR(IdOutOfRange, data);
MINIENS_DEFINE_ERROR(VocabMismatch, data);
MINIENS_DEFINE_ERROR(MalformedRow, data);
MINIENS_DEFINE_ERROR(UnknownLabel, data);
MINIENS_DEFINE_ERROR(DuplicateTestLeak, data);
MINIENS_DEFINE_ERROR(MissingData, data);
MINIENS_DEFINE_ERROR(CheckpointMismatch, data);

MINIENS_DEFINE_ERROR(NumericError, numeric);

#undef MINIENS_DEFINE_ERROR

}  // namespace miniens
