#pragma once

#define TQSIM_VERSION_MAJOR 1
#define TQSIM_VERSION_MINOR 0
#define TQSIM_VERSION_PATCH 0
#define TQSIM_VERSION "1.0.0"
