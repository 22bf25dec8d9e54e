#pragma once

#include <cstdint>

#include "gbt/common.hpp"

#if defined(__AVX512F__) || defined(__AVX2__)
#include <immintrin.h>
#endif

namespace gbt {

// Successor operators over a full fixed-capacity key region.
//   succ_gt(keys, k) = |{i : keys[i] <= k}|  (first slot strictly greater)
//   succ_ge(keys, k) = |{i : keys[i] <  k}|  (first slot greater-or-equal)
// Regions are non-decreasing; gap slots duplicate the next used key and
// trailing slots hold the lane sentinel, so counting needs no occupancy
// checks. The scalar versions have a hardwired trip count and no branches
// over slot contents; the simd versions must return identical results.

template <class Lane>
inline unsigned succ_gt_scalar(const Lane* keys, Lane k) {
  unsigned count = 0;
  for (unsigned i = 0; i < lane_traits<Lane>::capacity; ++i)
    count += (k >= keys[i]);
  return count;
}

template <class Lane>
inline unsigned succ_ge_scalar(const Lane* keys, Lane k) {
  unsigned count = 0;
  for (unsigned i = 0; i < lane_traits<Lane>::capacity; ++i)
    count += (k > keys[i]);
  return count;
}

#if defined(__AVX512F__) && defined(__AVX512BW__)

inline unsigned succ_gt_simd(const std::uint64_t* keys, std::uint64_t k) {
  const __m512i q = _mm512_set1_epi64(static_cast<long long>(k));
  const __mmask8 lo = _mm512_cmpge_epu64_mask(q, _mm512_loadu_si512(keys));
  const __mmask8 hi = _mm512_cmpge_epu64_mask(q, _mm512_loadu_si512(keys + 8));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

inline unsigned succ_ge_simd(const std::uint64_t* keys, std::uint64_t k) {
  const __m512i q = _mm512_set1_epi64(static_cast<long long>(k));
  const __mmask8 lo = _mm512_cmpgt_epu64_mask(q, _mm512_loadu_si512(keys));
  const __mmask8 hi = _mm512_cmpgt_epu64_mask(q, _mm512_loadu_si512(keys + 8));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

inline unsigned succ_gt_simd(const std::uint32_t* keys, std::uint32_t k) {
  const __m512i q = _mm512_set1_epi32(static_cast<int>(k));
  const __mmask16 lo = _mm512_cmpge_epu32_mask(q, _mm512_loadu_si512(keys));
  const __mmask16 hi = _mm512_cmpge_epu32_mask(q, _mm512_loadu_si512(keys + 16));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

inline unsigned succ_ge_simd(const std::uint32_t* keys, std::uint32_t k) {
  const __m512i q = _mm512_set1_epi32(static_cast<int>(k));
  const __mmask16 lo = _mm512_cmpgt_epu32_mask(q, _mm512_loadu_si512(keys));
  const __mmask16 hi = _mm512_cmpgt_epu32_mask(q, _mm512_loadu_si512(keys + 16));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

inline unsigned succ_gt_simd(const std::uint16_t* keys, std::uint16_t k) {
  const __m512i q = _mm512_set1_epi16(static_cast<short>(k));
  const __mmask32 lo = _mm512_cmpge_epu16_mask(q, _mm512_loadu_si512(keys));
  const __mmask32 hi = _mm512_cmpge_epu16_mask(q, _mm512_loadu_si512(keys + 32));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

inline unsigned succ_ge_simd(const std::uint16_t* keys, std::uint16_t k) {
  const __m512i q = _mm512_set1_epi16(static_cast<short>(k));
  const __mmask32 lo = _mm512_cmpgt_epu16_mask(q, _mm512_loadu_si512(keys));
  const __mmask32 hi = _mm512_cmpgt_epu16_mask(q, _mm512_loadu_si512(keys + 32));
  return static_cast<unsigned>(_mm_popcnt_u32(lo) + _mm_popcnt_u32(hi));
}

#elif defined(__AVX2__)

// AVX2 lacks unsigned compares; flip the sign bit and compare signed.

inline unsigned succ_gt_simd(const std::uint64_t* keys, std::uint64_t k) {
  const __m256i flip = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi64x(static_cast<long long>(k)), flip);
  unsigned gt = 0;
  for (unsigned i = 0; i < 16; i += 4) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    gt += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_cmpgt_epi64(v, q))))));
  }
  return 16 - gt;  // keys[i] <= k  ==  !(keys[i] > k)
}

inline unsigned succ_ge_simd(const std::uint64_t* keys, std::uint64_t k) {
  const __m256i flip = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ull));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi64x(static_cast<long long>(k)), flip);
  unsigned lt = 0;
  for (unsigned i = 0; i < 16; i += 4) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    lt += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_pd(_mm256_castsi256_pd(_mm256_cmpgt_epi64(q, v))))));
  }
  return lt;
}

inline unsigned succ_gt_simd(const std::uint32_t* keys, std::uint32_t k) {
  const __m256i flip = _mm256_set1_epi32(static_cast<int>(0x80000000u));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi32(static_cast<int>(k)), flip);
  unsigned gt = 0;
  for (unsigned i = 0; i < 32; i += 8) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    gt += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpgt_epi32(v, q))))));
  }
  return 32 - gt;
}

inline unsigned succ_ge_simd(const std::uint32_t* keys, std::uint32_t k) {
  const __m256i flip = _mm256_set1_epi32(static_cast<int>(0x80000000u));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi32(static_cast<int>(k)), flip);
  unsigned lt = 0;
  for (unsigned i = 0; i < 32; i += 8) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    lt += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpgt_epi32(q, v))))));
  }
  return lt;
}

inline unsigned succ_gt_simd(const std::uint16_t* keys, std::uint16_t k) {
  const __m256i flip = _mm256_set1_epi16(static_cast<short>(0x8000));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi16(static_cast<short>(k)), flip);
  unsigned gt2 = 0;  // movemask_epi8 reports 2 bits per 16-bit lane
  for (unsigned i = 0; i < 64; i += 16) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    gt2 += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_epi8(_mm256_cmpgt_epi16(v, q)))));
  }
  return 64 - gt2 / 2;
}

inline unsigned succ_ge_simd(const std::uint16_t* keys, std::uint16_t k) {
  const __m256i flip = _mm256_set1_epi16(static_cast<short>(0x8000));
  const __m256i q = _mm256_xor_si256(_mm256_set1_epi16(static_cast<short>(k)), flip);
  unsigned lt2 = 0;
  for (unsigned i = 0; i < 64; i += 16) {
    const __m256i v = _mm256_xor_si256(
        _mm256_loadu_si256(reinterpret_cast<const __m256i*>(keys + i)), flip);
    lt2 += static_cast<unsigned>(_mm_popcnt_u32(static_cast<unsigned>(
        _mm256_movemask_epi8(_mm256_cmpgt_epi16(q, v)))));
  }
  return lt2 / 2;
}

#else

template <class Lane>
inline unsigned succ_gt_simd(const Lane* keys, Lane k) {
  return succ_gt_scalar(keys, k);
}

template <class Lane>
inline unsigned succ_ge_simd(const Lane* keys, Lane k) {
  return succ_ge_scalar(keys, k);
}

#endif

template <class Lane>
inline unsigned succ_gt(const Lane* keys, Lane k) {
  return succ_gt_simd(keys, k);
}

template <class Lane>
inline unsigned succ_ge(const Lane* keys, Lane k) {
  return succ_ge_simd(keys, k);
}

// Reference implementations, kept for differential tests and the
// method-comparison benchmark. Same result contract as above.

template <class Lane>
inline unsigned succ_gt_binary(const Lane* keys, Lane k) {
  unsigned lo = 0, hi = lane_traits<Lane>::capacity;
  while (lo < hi) {
    const unsigned mid = (lo + hi) / 2;
    if (keys[mid] <= k)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

template <class Lane>
inline unsigned succ_ge_binary(const Lane* keys, Lane k) {
  unsigned lo = 0, hi = lane_traits<Lane>::capacity;
  while (lo < hi) {
    const unsigned mid = (lo + hi) / 2;
    if (keys[mid] < k)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

template <class Lane>
inline unsigned succ_gt_linear(const Lane* keys, Lane k) {
  for (unsigned i = 0; i < lane_traits<Lane>::capacity; ++i)
    if (keys[i] > k) return i;
  return lane_traits<Lane>::capacity;
}

template <class Lane>
inline unsigned succ_ge_linear(const Lane* keys, Lane k) {
  for (unsigned i = 0; i < lane_traits<Lane>::capacity; ++i)
    if (keys[i] >= k) return i;
  return lane_traits<Lane>::capacity;
}

}  // namespace gbt
