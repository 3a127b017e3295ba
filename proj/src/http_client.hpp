#pragma once

// Single point of configuration for the bundled HTTP library. Every
// translation unit that touches httplib must agree on this macro, otherwise
// the inline client/server types are built with two different layouts.
#ifdef BZB_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
