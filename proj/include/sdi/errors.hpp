#pragma once

#include <stdexcept>

namespace sdi {

/// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SDI_DEFINE_ERROR(Name) \
    struct Name : Error {      \
        using Error::Error;    \
    }

// Argument / domain problems.
SDI_DEFINE_ERROR(DomainError);
SDI_DEFINE_ERROR(OutOfRange);
SDI_DEFINE_ERROR(LengthMismatch);
SDI_DEFINE_ERROR(TooFewPoints);
SDI_DEFINE_ERROR(ConstantSample);
SDI_DEFINE_ERROR(BadScale);
SDI_DEFINE_ERROR(BadWeights);

// Marginal pipeline.
SDI_DEFINE_ERROR(InsufficientMonthData);
SDI_DEFINE_ERROR(DegenerateMonth);
SDI_DEFINE_ERROR(NonStationaryFit);
SDI_DEFINE_ERROR(SingularFit);
SDI_DEFINE_ERROR(DegenerateVariance);

// Vine structure.
SDI_DEFINE_ERROR(InvalidDiagonal);
SDI_DEFINE_ERROR(ProximityViolation);
SDI_DEFINE_ERROR(BadLabels);

// Analytics.
SDI_DEFINE_ERROR(EmptyGrid);
SDI_DEFINE_ERROR(EmptyWindow);
SDI_DEFINE_ERROR(NoOverlap);

// Ingest / config / IO.
SDI_DEFINE_ERROR(ParseError);
SDI_DEFINE_ERROR(GapError);
SDI_DEFINE_ERROR(AlignmentError);
SDI_DEFINE_ERROR(ConfigError);
SDI_DEFINE_ERROR(IoError);

#undef SDI_DEFINE_ERROR

}  // namespace sdi
