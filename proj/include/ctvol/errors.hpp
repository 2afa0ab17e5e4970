#pragma once

#include <stdexcept>
#include <string>

namespace ctvol {

// Error categories map to CLI exit codes: ConfigError -> 1, DataError -> 2,
// NumericError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};

// volume_io
struct BadMagic : DataError {
    using DataError::DataError;
};
struct UnsupportedDatatype : DataError {
    using DataError::DataError;
};
struct TruncatedPayload : DataError {
    using DataError::DataError;
};
struct NonPositiveSpacing : DataError {
    using DataError::DataError;
};
struct DegenerateWindow : ConfigError {
    using ConfigError::ConfigError;
};
struct EmptyInput : ConfigError {
    using ConfigError::ConfigError;
};
struct BadFractions : ConfigError {
    using ConfigError::ConfigError;
};
struct BadPng : DataError {
    using DataError::DataError;
};

// augment
struct CropLargerThanImage : ConfigError {
    using ConfigError::ConfigError;
};
struct EvenKernel : ConfigError {
    using ConfigError::ConfigError;
};

// segnet
struct ChannelMismatch : DataError {
    using DataError::DataError;
};
struct NonPositiveOutputSize : ConfigError {
    using ConfigError::ConfigError;
};
struct ShapeMismatch : DataError {
    using DataError::DataError;
};
struct EmptyRates : ConfigError {
    using ConfigError::ConfigError;
};
struct NonFiniteLoss : NumericError {
    using NumericError::NumericError;
};

// metrics
struct NonBinaryInput : DataError {
    using DataError::DataError;
};
struct EmptyDataset : DataError {
    using DataError::DataError;
};

// volumetry
struct NonBinaryMask : DataError {
    using DataError::DataError;
};
struct ZeroLungVolume : DataError {
    using DataError::DataError;
};
struct BadThresholds : ConfigError {
    using ConfigError::ConfigError;
};

// cli
struct MissingArtifact : ConfigError {
    using ConfigError::ConfigError;
};
struct ConfigInvalid : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace ctvol
