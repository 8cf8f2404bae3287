#pragma once

#include "boolean_function.hpp"

#include <optional>
#include <string>

namespace exsyn::gates
{

inline boolean_function constant( bool value )
{
  return boolean_function::from_rows( value ? "CONST1" : "CONST0", 0, 1, [value]( uint64_t ) { return uint64_t( value ); } );
}

inline boolean_function buf()
{
  return boolean_function::from_rows( "BUF", 1, 1, []( uint64_t r ) { return r & 1u; } );
}

inline boolean_function not_()
{
  return boolean_function::from_rows( "NOT", 1, 1, []( uint64_t r ) { return ~r & 1u; } );
}

inline boolean_function and_( uint32_t n = 2 )
{
  auto const all = ( uint64_t( 1 ) << n ) - 1u;
  return boolean_function::from_rows( "AND", n, 1, [all]( uint64_t r ) { return uint64_t( r == all ); } );
}

inline boolean_function or_( uint32_t n = 2 )
{
  return boolean_function::from_rows( "OR", n, 1, []( uint64_t r ) { return uint64_t( r != 0u ); } );
}

inline boolean_function nand_( uint32_t n = 2 )
{
  auto const all = ( uint64_t( 1 ) << n ) - 1u;
  return boolean_function::from_rows( "NAND", n, 1, [all]( uint64_t r ) { return uint64_t( r != all ); } );
}

inline boolean_function nor_( uint32_t n = 2 )
{
  return boolean_function::from_rows( "NOR", n, 1, []( uint64_t r ) { return uint64_t( r == 0u ); } );
}

inline boolean_function xor_( uint32_t n = 2 )
{
  return boolean_function::from_rows( "XOR", n, 1, []( uint64_t r ) { return uint64_t( __builtin_popcountll( r ) & 1 ); } );
}

inline boolean_function xnor_( uint32_t n = 2 )
{
  return boolean_function::from_rows( "XNOR", n, 1, []( uint64_t r ) { return uint64_t( ~__builtin_popcountll( r ) & 1 ); } );
}

/*! \brief a -> b, with a on slot 0 */
inline boolean_function impl()
{
  return boolean_function::from_rows( "IMPL", 2, 1, []( uint64_t r ) { return uint64_t( !( r >> 1 ) || ( r & 1u ) ); } );
}

/*! \brief if s then t else e, slots (s, t, e) */
inline boolean_function ite()
{
  return boolean_function::from_rows( "ITE", 3, 1, []( uint64_t r ) {
    auto const s = ( r >> 2 ) & 1u, t = ( r >> 1 ) & 1u, e = r & 1u;
    return s ? t : e;
  } );
}

/*! \brief controlled swap: (c, a, b) -> (c, c ? b : a, c ? a : b) */
inline boolean_function fredkin()
{
  return boolean_function::from_rows( "FREDKIN", 3, 3, []( uint64_t r ) {
    auto const c = ( r >> 2 ) & 1u, a = ( r >> 1 ) & 1u, b = r & 1u;
    auto const o1 = c ? b : a, o2 = c ? a : b;
    return c | ( o1 << 1 ) | ( o2 << 2 );
  } );
}

/*! \brief controlled-controlled not: (a, b, c) -> (a, b, c ^ (a & b)) */
inline boolean_function toffoli()
{
  return boolean_function::from_rows( "TOFFOLI", 3, 3, []( uint64_t r ) {
    auto const a = ( r >> 2 ) & 1u, b = ( r >> 1 ) & 1u, c = r & 1u;
    return a | ( b << 1 ) | ( ( c ^ ( a & b ) ) << 2 );
  } );
}

/*! \brief comparator: (a, b) -> (min, max) */
inline boolean_function cmp()
{
  return boolean_function::from_rows( "CMP", 2, 2, []( uint64_t r ) {
    auto const a = ( r >> 1 ) & 1u, b = r & 1u;
    return ( a & b ) | ( ( a | b ) << 1 );
  } );
}

/*! \brief Resolves a netlist mnemonic for a given number of arguments. */
inline std::optional<boolean_function> by_mnemonic( std::string const& m, uint32_t nargs )
{
  if ( ( m == "CONST0" || m == "GND" ) && nargs == 0u )
    return constant( false );
  if ( ( m == "CONST1" || m == "VDD" ) && nargs == 0u )
    return constant( true );
  if ( ( m == "BUF" || m == "BUFF" ) && nargs == 1u )
    return buf();
  if ( m == "NOT" && nargs == 1u )
    return not_();
  if ( nargs >= 1u && nargs <= 16u )
  {
    if ( m == "AND" )
      return and_( nargs );
    if ( m == "OR" )
      return or_( nargs );
    if ( m == "NAND" )
      return nand_( nargs );
    if ( m == "NOR" )
      return nor_( nargs );
    if ( m == "XOR" )
      return xor_( nargs );
    if ( m == "XNOR" )
      return xnor_( nargs );
  }
  if ( m == "IMPL" && nargs == 2u )
    return impl();
  if ( m == "ITE" && nargs == 3u )
    return ite();
  if ( ( m == "CSWAP" || m == "FREDKIN" ) && nargs == 3u )
    return fredkin();
  if ( ( m == "CCNOT" || m == "TOFFOLI" ) && nargs == 3u )
    return toffoli();
  if ( m == "CMP" && nargs == 2u )
    return cmp();
  return std::nullopt;
}

inline bool is_known_mnemonic( std::string const& m )
{
  static const char* names[] = {"CONST0", "GND", "CONST1", "VDD", "BUF", "BUFF", "NOT", "AND", "OR", "NAND", "NOR",
                                "XOR", "XNOR", "IMPL", "ITE", "CSWAP", "FREDKIN", "CCNOT", "TOFFOLI", "CMP"};
  for ( auto n : names )
  {
    if ( m == n )
      return true;
  }
  return false;
}

} // namespace exsyn::gates
