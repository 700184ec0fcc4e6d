#pragma once

#include <stdexcept>
#include <string>

namespace hom {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HOM_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                  \
    public:                                                      \
        explicit Name(const std::string& what) : Error(what) {}  \
    }

// data_ingest
HOM_DEFINE_ERROR(EmptySeries);
HOM_DEFINE_ERROR(SchemaError);
HOM_DEFINE_ERROR(SplitError);
// simulate
HOM_DEFINE_ERROR(HistoryMismatch);
// likelihood
HOM_DEFINE_ERROR(InsufficientData);
HOM_DEFINE_ERROR(NonFiniteLikelihood);
// calibrate
HOM_DEFINE_ERROR(CalibrationError);
// forecast_eval
HOM_DEFINE_ERROR(ZeroRealizedPrice);
HOM_DEFINE_ERROR(LengthMismatch);
HOM_DEFINE_ERROR(EmptyEvaluation);
// gof_tests
HOM_DEFINE_ERROR(NonPositivePrice);
HOM_DEFINE_ERROR(DegenerateSample);
// configuration / cli
HOM_DEFINE_ERROR(ConfigError);

#undef HOM_DEFINE_ERROR

}  // namespace hom
