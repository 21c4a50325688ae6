#pragma once

#include <cstddef>
#include <vector>

#include "pcno/spectral/field.hpp"

namespace pcno {

/// Appends `extra[a]` zero cells at the end of every axis.
RealField zero_pad(const RealField& f, const std::vector<std::size_t>& extra);

/// Keeps the leading `sizes` cells of every axis (inverse of zero_pad).
RealField crop(const RealField& f, const std::vector<std::size_t>& sizes);

/// out[i + shift] = in[i] with periodic wrap on every axis.
RealField circular_shift(const RealField& f, const std::vector<long>& shift);

/// Frame `t` of a trajectory whose first axis is time.
RealField time_slice(const RealField& trajectory, std::size_t t);

/// Stacks equally shaped frames along a new leading axis.
RealField stack_frames(const std::vector<RealField>& frames, const Axis& leading);

/// Concatenates fields with identical grids along the channel dimension.
RealField concat_channels(const std::vector<RealField>& parts);

/// Sum of |v|^2 over all channels and points.
double squared_norm(const RealField& f);

} // namespace pcno
