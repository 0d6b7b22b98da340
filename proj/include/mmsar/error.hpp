#ifndef MMSAR_ERROR_HPP
#define MMSAR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mmsar {

// Two families: bad inputs/configuration (CLI exit 2) and numerical
// failures (CLI exit 3). Concrete types name the failing contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept = 0;
};

class InputError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

#define MMSAR_DECLARE_ERROR(Name, Base)      \
    class Name : public Base {               \
    public:                                  \
        using Base::Base;                    \
    }

MMSAR_DECLARE_ERROR(InvalidInput, InputError);
MMSAR_DECLARE_ERROR(InvalidBand, InputError);
MMSAR_DECLARE_ERROR(OutOfRange, InputError);
MMSAR_DECLARE_ERROR(InvalidChirp, InputError);
MMSAR_DECLARE_ERROR(InvalidMeta, InputError);
MMSAR_DECLARE_ERROR(PlanInfeasible, InputError);
MMSAR_DECLARE_ERROR(ConfigError, InputError);
MMSAR_DECLARE_ERROR(FormatError, InputError);
MMSAR_DECLARE_ERROR(DomainError, InputError);
MMSAR_DECLARE_ERROR(RenderError, InputError);
MMSAR_DECLARE_ERROR(Underdetermined, NumericError);
MMSAR_DECLARE_ERROR(ResonanceError, NumericError);
MMSAR_DECLARE_ERROR(DegenerateGrid, NumericError);
MMSAR_DECLARE_ERROR(FitFailed, NumericError);

#undef MMSAR_DECLARE_ERROR

/// Raised when a scatterer leaves the scene extent during the acquisition.
class SimulationBounds : public InputError {
public:
    SimulationBounds(std::size_t index, const std::string& what)
        : InputError("scatterer " + std::to_string(index) + ": " + what), index_(index) {}
    std::size_t scatterer_index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Wraps a failure inside a pipeline stage with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, int code)
        : Error("stage '" + stage + "': " + what), stage_(std::move(stage)), code_(code) {}
    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept override { return code_; }

private:
    std::string stage_;
    int code_;
};

}  // namespace mmsar

#endif
