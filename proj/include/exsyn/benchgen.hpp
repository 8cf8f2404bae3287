#pragma once

#include "bench_io.hpp"
#include "boolean_function.hpp"
#include "circuit.hpp"
#include "gates.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace exsyn
{

inline std::vector<std::string> const& alu_families()
{
  static std::vector<std::string> const f{"mux", "demux", "add", "sub", "cmp", "shift", "moa", "mul"};
  return f;
}

struct family_spec
{
  std::string family;
  uint32_t n{1};
};

struct family_size
{
  uint64_t inputs{0};
  uint64_t outputs{0};
  uint64_t gates{0};
};

namespace detail
{

inline std::optional<uint32_t> exact_log2( uint64_t n )
{
  if ( n == 0u || ( n & ( n - 1u ) ) )
    return std::nullopt;
  uint32_t k = 0;
  while ( ( uint64_t( 1 ) << k ) < n )
    ++k;
  return k;
}

} // namespace detail

/*! \brief Empty string if `n` is valid for the family, else the reason. */
inline std::string family_error( family_spec const& s )
{
  auto const& f = s.family;
  if ( f == "mux" || f == "demux" )
  {
    auto const k = detail::exact_log2( s.n );
    if ( !k || *k < 1u )
      return f + " requires n = 2^k with k >= 1";
    return {};
  }
  if ( f == "moa" )
  {
    auto const k = detail::exact_log2( uint64_t( s.n ) + 1u );
    if ( !k || *k < 2u )
      return "moa requires n = 2^k - 1 with k >= 2";
    return {};
  }
  if ( f == "mul" )
    return s.n >= 2u ? std::string{} : "mul requires n >= 2";
  if ( f == "add" || f == "sub" || f == "cmp" || f == "shift" )
  {
    if ( s.n < 1u )
      return f + " requires n >= 1";
    if ( f == "shift" && s.n > 20u )
      return "shift n is limited to 20";
    return {};
  }
  return "unknown family '" + f + "'";
}

/*! \brief Reference counts for a valid family size (2n inputs for mul). */
inline family_size family_counts( family_spec const& s )
{
  if ( auto e = family_error( s ); !e.empty() )
    throw std::invalid_argument( e );
  uint64_t const n = s.n;
  auto const& f = s.family;
  if ( f == "mux" )
  {
    auto const k = *detail::exact_log2( n );
    return {n + k, 1u, n + k + 1u};
  }
  if ( f == "demux" )
  {
    auto const k = *detail::exact_log2( n );
    return {k + 1u, n, n + k};
  }
  if ( f == "add" )
    return {2u * n + 1u, n + 1u, 5u * n};
  if ( f == "sub" )
    return {2u * n + 1u, n + 1u, 7u * n};
  if ( f == "cmp" )
    return {2u * n, 3u, 3u * n + 4u};
  if ( f == "shift" )
  {
    uint64_t const w = uint64_t( 1 ) << n;
    return {w + n, w, w * ( 3u * n - 2u ) + n + 2u};
  }
  if ( f == "moa" )
  {
    auto const k = *detail::exact_log2( n + 1u );
    uint64_t const p = uint64_t( 1 ) << k;
    return {n, k, 2u * p * ( k - 2u ) + p - k + 3u};
  }
  return {2u * n, 2u * n, 6u * n * n - 8u * n};
}

namespace detail
{

inline uint64_t bit_width( uint64_t v )
{
  uint64_t w = 0;
  while ( v )
  {
    ++w;
    v >>= 1u;
  }
  return w;
}

struct builder
{
  circuit c;

  signal in( std::string const& name ) { return {c.add_input( name ), 0u}; }
  signal gate( boolean_function fn, std::vector<signal> const& fi ) { return {c.add_gate( std::move( fn ), fi ), 0u}; }
  signal not_( signal a ) { return gate( gates::not_(), {a} ); }
  signal and_( std::vector<signal> const& fi ) { return gate( gates::and_( static_cast<uint32_t>( fi.size() ) ), fi ); }
  signal or_( std::vector<signal> const& fi ) { return gate( gates::or_( static_cast<uint32_t>( fi.size() ) ), fi ); }
  signal nor_( std::vector<signal> const& fi ) { return gate( gates::nor_( static_cast<uint32_t>( fi.size() ) ), fi ); }
  signal xor_( signal a, signal b ) { return gate( gates::xor_(), {a, b} ); }
  signal xnor_( signal a, signal b ) { return gate( gates::xnor_(), {a, b} ); }

  std::pair<signal, signal> half_adder( signal a, signal b ) { return {xor_( a, b ), and_( {a, b} )}; }

  std::pair<signal, signal> full_adder( signal a, signal b, signal c )
  {
    auto const x = xor_( a, b );
    auto const s = xor_( x, c );
    auto const carry = or_( {and_( {a, b} ), and_( {x, c} )} );
    return {s, carry};
  }
};

inline std::vector<signal> inputs( builder& b, std::string const& prefix, uint64_t count )
{
  std::vector<signal> r;
  for ( uint64_t i = 0; i < count; ++i )
    r.push_back( b.in( prefix + std::to_string( i ) ) );
  return r;
}

inline circuit gen_mux( uint32_t n )
{
  builder b;
  auto const k = *exact_log2( n );
  auto const d = inputs( b, "d", n );
  auto const s = inputs( b, "s", k );
  std::vector<signal> ns;
  for ( auto const& x : s )
    ns.push_back( b.not_( x ) );
  std::vector<signal> terms;
  for ( uint32_t a = 0; a < n; ++a )
  {
    std::vector<signal> fi{d[a]};
    for ( uint32_t j = 0; j < k; ++j )
      fi.push_back( ( ( a >> j ) & 1u ) ? s[j] : ns[j] );
    terms.push_back( b.and_( fi ) );
  }
  b.c.add_output( "y", b.or_( terms ) );
  return b.c;
}

inline circuit gen_demux( uint32_t n )
{
  builder b;
  auto const k = *exact_log2( n );
  auto const d = b.in( "d" );
  auto const s = inputs( b, "s", k );
  std::vector<signal> ns;
  for ( auto const& x : s )
    ns.push_back( b.not_( x ) );
  for ( uint32_t a = 0; a < n; ++a )
  {
    std::vector<signal> fi{d};
    for ( uint32_t j = 0; j < k; ++j )
      fi.push_back( ( ( a >> j ) & 1u ) ? s[j] : ns[j] );
    b.c.add_output( "y" + std::to_string( a ), b.and_( fi ) );
  }
  return b.c;
}

inline circuit gen_add( uint32_t n )
{
  builder b;
  auto const a = inputs( b, "a", n );
  auto const bb = inputs( b, "b", n );
  auto carry = b.in( "cin" );
  for ( uint32_t i = 0; i < n; ++i )
  {
    auto const [s, c] = b.full_adder( a[i], bb[i], carry );
    b.c.add_output( "s" + std::to_string( i ), s );
    carry = c;
  }
  b.c.add_output( "cout", carry );
  return b.c;
}

/* d = a - b - bin; borrow = (!a & b) | (!(a ^ b) & bin) */
inline circuit gen_sub( uint32_t n )
{
  builder b;
  auto const a = inputs( b, "a", n );
  auto const bb = inputs( b, "b", n );
  auto borrow = b.in( "bin" );
  for ( uint32_t i = 0; i < n; ++i )
  {
    auto const x = b.xor_( a[i], bb[i] );
    auto const d = b.xor_( x, borrow );
    auto const t1 = b.and_( {b.not_( a[i] ), bb[i]} );
    auto const t2 = b.and_( {b.not_( x ), borrow} );
    b.c.add_output( "d" + std::to_string( i ), d );
    borrow = b.or_( {t1, t2} );
  }
  b.c.add_output( "bout", borrow );
  return b.c;
}

/* eq and gt from bitwise XNOR/AND terms, lt = !(eq | gt); unary AND/OR at n = 1 act as buffers */
inline circuit gen_cmp( uint32_t n )
{
  builder b;
  auto const a = inputs( b, "a", n );
  auto const bb = inputs( b, "b", n );
  std::vector<signal> e, terms;
  for ( uint32_t i = 0; i < n; ++i )
    e.push_back( b.xnor_( a[i], bb[i] ) );
  for ( uint32_t i = 0; i < n; ++i )
  {
    std::vector<signal> fi{a[i], b.not_( bb[i] )};
    for ( uint32_t j = i + 1u; j < n; ++j )
      fi.push_back( e[j] );
    terms.push_back( b.and_( fi ) );
  }
  auto const eq = b.and_( e );
  auto const gt = b.or_( terms );
  auto const lt = b.not_( b.or_( {eq, gt} ) );
  b.c.add_output( "eq", eq );
  b.c.add_output( "gt", gt );
  b.c.add_output( "lt", lt );
  return b.c;
}

/* right shift of a 2^n-bit word by the n-bit amount s; 2:1 muxes whose upper input is ground reduce to one AND */
inline circuit gen_shift( uint32_t n )
{
  builder b;
  uint64_t const w = uint64_t( 1 ) << n;
  auto word = inputs( b, "d", w );
  auto const s = inputs( b, "s", n );
  std::vector<signal> ns;
  for ( auto const& x : s )
    ns.push_back( b.not_( x ) );
  for ( uint32_t j = 0; j < n; ++j )
  {
    uint64_t const sh = uint64_t( 1 ) << j;
    std::vector<signal> next;
    for ( uint64_t i = 0; i < w; ++i )
    {
      if ( i + sh < w )
        next.push_back( b.or_( {b.and_( {word[i], ns[j]} ), b.and_( {word[i + sh], s[j]} )} ) );
      else
        next.push_back( b.and_( {word[i], ns[j]} ) );
    }
    word = std::move( next );
  }
  for ( uint64_t i = 0; i < w; ++i )
    b.c.add_output( "y" + std::to_string( i ), word[i] );
  return b.c;
}

/* counts ones by adding each input into an accumulator through a half-adder chain */
inline circuit gen_moa( uint32_t n )
{
  builder b;
  auto const k = *exact_log2( uint64_t( n ) + 1u );
  auto const x = inputs( b, "x", n );
  std::vector<signal> acc{x[0]};
  for ( uint32_t i = 1; i < n; ++i )
  {
    auto const width = bit_width( uint64_t( i ) + 1u );
    auto carry = x[i];
    std::vector<signal> next;
    for ( size_t j = 0; j < acc.size(); ++j )
    {
      if ( j + 1u == acc.size() && width == acc.size() )
      {
        next.push_back( b.xor_( acc[j], carry ) );
        break;
      }
      auto const [s, c] = b.half_adder( acc[j], carry );
      next.push_back( s );
      carry = c;
    }
    if ( width > acc.size() )
      next.push_back( carry );
    acc = std::move( next );
  }
  for ( uint32_t j = 0; j < k; ++j )
    b.c.add_output( "s" + std::to_string( j ), acc[j] );
  return b.c;
}

/* carry-save array of partial products, then a ripple-carry row */
inline circuit gen_mul( uint32_t n )
{
  builder b;
  auto const a = inputs( b, "a", n );
  auto const bb = inputs( b, "b", n );
  std::vector<std::vector<signal>> pp( n );
  for ( uint32_t i = 0; i < n; ++i )
    for ( uint32_t j = 0; j < n; ++j )
      pp[i].push_back( b.and_( {a[j], bb[i]} ) );
  std::vector<signal> out{pp[0][0]};
  std::map<uint32_t, signal> sum, carry;
  for ( uint32_t j = 1; j < n; ++j )
    sum[j] = pp[0][j];
  for ( uint32_t i = 1; i < n; ++i )
  {
    std::map<uint32_t, signal> nsum, ncarry;
    for ( uint32_t w = i; w + 1u < i + n; ++w )
    {
      auto const p = pp[i][w - i];
      if ( i == 1u )
      {
        auto const [s, c] = b.half_adder( sum.at( w ), p );
        nsum[w] = s;
        ncarry[w + 1u] = c;
      }
      else
      {
        auto const [s, c] = b.full_adder( sum.at( w ), p, carry.at( w ) );
        nsum[w] = s;
        ncarry[w + 1u] = c;
      }
    }
    nsum[i + n - 1u] = pp[i][n - 1u];
    out.push_back( nsum.at( i ) );
    sum = std::move( nsum );
    carry = std::move( ncarry );
  }
  std::optional<signal> c;
  for ( uint32_t w = n; w + 1u < 2u * n; ++w )
  {
    if ( !c )
    {
      auto const [s, cc] = b.half_adder( sum.at( w ), carry.at( w ) );
      out.push_back( s );
      c = cc;
    }
    else
    {
      auto const [s, cc] = b.full_adder( sum.at( w ), carry.at( w ), *c );
      out.push_back( s );
      c = cc;
    }
  }
  out.push_back( *c );
  for ( uint32_t j = 0; j < out.size(); ++j )
    b.c.add_output( "p" + std::to_string( j ), out[j] );
  return b.c;
}

} // namespace detail

/*! \brief Generates one member of an ALU-n family; throws std::invalid_argument for an invalid n. */
inline circuit gen_alu( family_spec const& s )
{
  if ( auto e = family_error( s ); !e.empty() )
    throw std::invalid_argument( e );
  circuit c;
  if ( s.family == "mux" )
    c = detail::gen_mux( s.n );
  else if ( s.family == "demux" )
    c = detail::gen_demux( s.n );
  else if ( s.family == "add" )
    c = detail::gen_add( s.n );
  else if ( s.family == "sub" )
    c = detail::gen_sub( s.n );
  else if ( s.family == "cmp" )
    c = detail::gen_cmp( s.n );
  else if ( s.family == "shift" )
    c = detail::gen_shift( s.n );
  else if ( s.family == "moa" )
    c = detail::gen_moa( s.n );
  else
    c = detail::gen_mul( s.n );
  c.set_name( std::to_string( s.n ) + "-" + s.family );
  return c;
}

/*! \brief A two-level requirement from hex truth tables over `m` inputs x0..x{m-1} (x0 is the row MSB). */
inline circuit truth_table_requirement( std::vector<std::string> const& tables, uint32_t m )
{
  if ( tables.empty() )
    throw std::invalid_argument( "at least one truth table is required" );
  if ( m == 0u || m > 16u )
    throw std::invalid_argument( "truth-table requirements need 1 to 16 inputs" );
  auto const f = boolean_function::from_hex( "req", m, tables );
  circuit c;
  std::vector<signal> x, nx;
  for ( uint32_t i = 0; i < m; ++i )
    x.push_back( {c.add_input( "x" + std::to_string( i ) ), 0u} );
  std::vector<bool> needs_not( m, false );
  for ( uint32_t o = 0; o < f.num_outputs(); ++o )
    for ( uint64_t r = 0; r < f.num_rows(); ++r )
      if ( f.get( r, o ) )
        for ( uint32_t i = 0; i < m; ++i )
          if ( !boolean_function::input_bit( r, m, i ) )
            needs_not[i] = true;
  for ( uint32_t i = 0; i < m; ++i )
    nx.push_back( needs_not[i] ? signal{c.add_gate( gates::not_(), {x[i]} ), 0u} : x[i] );
  for ( uint32_t o = 0; o < f.num_outputs(); ++o )
  {
    std::vector<signal> terms;
    for ( uint64_t r = 0; r < f.num_rows(); ++r )
    {
      if ( !f.get( r, o ) )
        continue;
      std::vector<signal> lits;
      for ( uint32_t i = 0; i < m; ++i )
        lits.push_back( boolean_function::input_bit( r, m, i ) ? x[i] : nx[i] );
      terms.push_back( lits.size() == 1u ? lits[0] : signal{c.add_gate( gates::and_( m ), lits ), 0u} );
    }
    signal out;
    if ( terms.empty() )
      out = {c.add_gate( gates::constant( false ), {} ), 0u};
    else if ( terms.size() == f.num_rows() )
      out = {c.add_gate( gates::constant( true ), {} ), 0u};
    else if ( terms.size() == 1u )
      out = terms[0];
    else
      out = {c.add_gate( gates::or_( static_cast<uint32_t>( terms.size() ) ), terms ), 0u};
    c.add_output( "y" + std::to_string( o ), out );
  }
  std::string name = "tt";
  for ( auto const& t : tables )
    name += "_" + t;
  c.set_name( name );
  return c;
}

/*! \brief Bitonic sorting network over `n` wires from CMP gates, for any n (y0 is the minimum).
 *
 * Descending comparators are ascending ones with their outputs exchanged.
 */
inline circuit gen_bitonic_sorter( uint32_t n )
{
  if ( n < 2u )
    throw std::invalid_argument( "a sorting network needs at least 2 inputs" );
  circuit c;
  std::vector<signal> w;
  for ( uint32_t i = 0; i < n; ++i )
    w.push_back( {c.add_input( "x" + std::to_string( i ) ), 0u} );
  auto compare = [&]( uint32_t i, uint32_t j, bool up ) {
    auto const g = c.add_gate( gates::cmp(), {w[i], w[j]} );
    w[i] = {g, up ? 0u : 1u};
    w[j] = {g, up ? 1u : 0u};
  };
  std::function<void( uint32_t, uint32_t, bool )> merge = [&]( uint32_t lo, uint32_t len, bool up ) {
    if ( len < 2u )
      return;
    uint32_t m = 1;
    while ( 2u * m < len )
      m *= 2u;
    for ( uint32_t i = lo; i < lo + len - m; ++i )
      compare( i, i + m, up );
    merge( lo, m, up );
    merge( lo + m, len - m, up );
  };
  std::function<void( uint32_t, uint32_t, bool )> sort = [&]( uint32_t lo, uint32_t len, bool up ) {
    if ( len < 2u )
      return;
    auto const m = len / 2u;
    sort( lo, m, !up );
    sort( lo + m, len - m, up );
    merge( lo, len, up );
  };
  sort( 0u, n, true );
  for ( uint32_t i = 0; i < n; ++i )
    c.add_output( "y" + std::to_string( i ), w[i] );
  c.set_name( std::to_string( n ) + "-bitonic" );
  return c;
}

/*! \brief Loads a 74XXX BENCH netlist. */
inline circuit load_74xxx( std::string const& path ) { return read_bench_file( path ); }

} // namespace exsyn
