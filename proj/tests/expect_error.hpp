#pragma once

#include <gtest/gtest.h>

#include "quantnet/error.hpp"

#define EXPECT_QN_ERROR(stmt, expected_code)                          \
  EXPECT_THROW(                                                       \
      {                                                               \
        try {                                                         \
          stmt;                                                       \
        } catch (const quantnet::Error& qn_error_) {                  \
          EXPECT_EQ(qn_error_.code(), expected_code) << qn_error_.what(); \
          throw;                                                      \
        }                                                             \
      },                                                              \
      quantnet::Error)
