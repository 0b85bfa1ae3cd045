#pragma once

#ifndef BSSHF_VERSION
#define BSSHF_VERSION "0.1.0"
#endif

#ifndef BSSHF_BUILD_HASH
#define BSSHF_BUILD_HASH "unknown"
#endif
