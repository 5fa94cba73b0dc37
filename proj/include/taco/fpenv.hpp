#pragma once

namespace taco {

// Flush denormal doubles to zero (FTZ/DAZ on x86). Long runs drive tanh
// saturation gradients and Adam moments into the denormal range, where
// scalar arithmetic is 10-100x slower; flushing costs nothing measurable
// in accuracy at our scales. Call once at process start.
void enable_flush_denormals();

}  // namespace taco
