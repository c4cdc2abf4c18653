#pragma once

namespace edgegen {

/// Principal real branch W0 on [-1/e, inf).
double lambert_w0(double z);
/// Lower real branch W-1 on [-1/e, 0).
double lambert_wm1(double z);

}  // namespace edgegen
