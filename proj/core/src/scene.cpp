#include "pointfuse/scene.hpp"

#include "pointfuse/errors.hpp"

namespace pointfuse {

void BinaryMask::subtract(const BinaryMask& other) {
  if (other.width != width || other.height != height) {
    throw MaskDimensionMismatchError("mask subtraction requires equal dimensions");
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (other.bits[i]) bits[i] = 0;
  }
}

}  // namespace pointfuse
