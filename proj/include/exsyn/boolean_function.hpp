#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace exsyn
{

/*! \brief Multi-output Boolean function stored as one bit column per output.
 *
 * Row r encodes the input vector with input 0 as the most significant bit,
 * so for a 2-input function row 2 means (x0=1, x1=0).  Bit r of an output
 * column is the output value on row r.
 */
class boolean_function
{
public:
  boolean_function() = default;

  boolean_function( std::string name, uint32_t num_inputs, uint32_t num_outputs )
      : name_( std::move( name ) ), num_inputs_( num_inputs ), num_outputs_( num_outputs )
  {
    if ( num_outputs == 0u )
    {
      throw std::invalid_argument( "boolean function needs at least one output" );
    }
    if ( num_inputs > 30u )
    {
      throw std::invalid_argument( "boolean function has too many inputs" );
    }
    columns_.assign( num_outputs, std::vector<uint64_t>( num_words(), 0u ) );
  }

  /*! \brief Builds a function from a row callback returning packed outputs (bit j = output j). */
  static boolean_function from_rows( std::string name, uint32_t num_inputs, uint32_t num_outputs,
                                     std::function<uint64_t( uint64_t )> const& fn )
  {
    boolean_function f( std::move( name ), num_inputs, num_outputs );
    for ( uint64_t r = 0; r < f.num_rows(); ++r )
    {
      auto const v = fn( r );
      for ( uint32_t o = 0; o < num_outputs; ++o )
      {
        f.set( r, o, ( v >> o ) & 1u );
      }
    }
    return f;
  }

  /*! \brief Parses one hex string per output; bit r of the number is row r. */
  static boolean_function from_hex( std::string name, uint32_t num_inputs, std::vector<std::string> const& tables )
  {
    boolean_function f( std::move( name ), num_inputs, static_cast<uint32_t>( tables.size() ) );
    for ( uint32_t o = 0; o < tables.size(); ++o )
    {
      f.set_column_hex( o, tables[o] );
    }
    return f;
  }

  std::string const& name() const { return name_; }
  void set_name( std::string name ) { name_ = std::move( name ); }
  uint32_t num_inputs() const { return num_inputs_; }
  uint32_t num_outputs() const { return num_outputs_; }
  uint64_t num_rows() const { return uint64_t( 1 ) << num_inputs_; }

  bool get( uint64_t row, uint32_t out ) const
  {
    return ( columns_[out][row >> 6] >> ( row & 63u ) ) & 1u;
  }

  void set( uint64_t row, uint32_t out, bool value )
  {
    auto& w = columns_[out][row >> 6];
    auto const mask = uint64_t( 1 ) << ( row & 63u );
    w = value ? ( w | mask ) : ( w & ~mask );
  }

  /*! \brief Packed output row (bit j = output j); requires at most 64 outputs. */
  uint64_t row( uint64_t r ) const
  {
    uint64_t v = 0;
    for ( uint32_t o = 0; o < num_outputs_; ++o )
    {
      v |= uint64_t( get( r, o ) ) << o;
    }
    return v;
  }

  std::vector<uint64_t> const& column( uint32_t out ) const { return columns_[out]; }

  /*! \brief Row index of an input vector given as bits (entry 0 = input 0). */
  static uint64_t row_of( std::vector<bool> const& inputs )
  {
    uint64_t r = 0;
    for ( auto b : inputs )
    {
      r = ( r << 1 ) | uint64_t( b );
    }
    return r;
  }

  static bool input_bit( uint64_t row, uint32_t num_inputs, uint32_t index )
  {
    return ( row >> ( num_inputs - 1u - index ) ) & 1u;
  }

  std::string to_hex( uint32_t out ) const
  {
    static constexpr char digits[] = "0123456789abcdef";
    auto const ndigits = num_rows() <= 4u ? uint64_t( 1 ) : num_rows() / 4u;
    std::string s( ndigits, '0' );
    for ( uint64_t d = 0; d < ndigits; ++d )
    {
      uint32_t nibble = 0;
      for ( uint32_t b = 0; b < 4u; ++b )
      {
        auto const r = d * 4u + b;
        if ( r < num_rows() && get( r, out ) )
        {
          nibble |= 1u << b;
        }
      }
      s[ndigits - 1u - d] = digits[nibble];
    }
    return "0x" + s;
  }

  bool same_table( boolean_function const& other ) const
  {
    return num_inputs_ == other.num_inputs_ && num_outputs_ == other.num_outputs_ && columns_ == other.columns_;
  }

  bool operator==( boolean_function const& other ) const
  {
    return name_ == other.name_ && same_table( other );
  }

  /*! \brief True if the output is constant; the constant is stored in `value`. */
  bool is_constant_output( uint32_t out, bool& value ) const
  {
    value = get( 0, out );
    for ( uint64_t r = 1; r < num_rows(); ++r )
    {
      if ( get( r, out ) != value )
      {
        return false;
      }
    }
    return true;
  }

private:
  uint64_t num_words() const { return ( num_rows() + 63u ) >> 6; }

  void set_column_hex( uint32_t out, std::string text )
  {
    if ( text.size() > 1u && text[0] == '0' && ( text[1] == 'x' || text[1] == 'X' ) )
    {
      text = text.substr( 2 );
    }
    if ( text.empty() )
    {
      throw std::invalid_argument( "empty truth table" );
    }
    auto const expected = num_rows() <= 4u ? uint64_t( 1 ) : num_rows() / 4u;
    auto const first = text.find_first_not_of( '0' );
    auto const significant = first == std::string::npos ? uint64_t( 0 ) : uint64_t( text.size() - first );
    if ( text.size() > expected && significant > expected )
    {
      throw std::invalid_argument( "truth table " + text + " is longer than 2^" + std::to_string( num_inputs_ ) + " bits" );
    }
    for ( uint64_t d = 0; d < text.size(); ++d )
    {
      auto const c = text[text.size() - 1u - d];
      uint32_t nibble;
      if ( c >= '0' && c <= '9' )
        nibble = c - '0';
      else if ( c >= 'a' && c <= 'f' )
        nibble = c - 'a' + 10;
      else if ( c >= 'A' && c <= 'F' )
        nibble = c - 'A' + 10;
      else
        throw std::invalid_argument( std::string( "bad hex digit '" ) + c + "'" );
      for ( uint32_t b = 0; b < 4u; ++b )
      {
        auto const r = d * 4u + b;
        if ( ( nibble >> b ) & 1u )
        {
          if ( r >= num_rows() )
          {
            throw std::invalid_argument( "truth table " + text + " has bits beyond 2^" + std::to_string( num_inputs_ ) );
          }
          set( r, out, true );
        }
      }
    }
  }

  std::string name_;
  uint32_t num_inputs_{0};
  uint32_t num_outputs_{0};
  std::vector<std::vector<uint64_t>> columns_;
};

/*! \brief Ordered list of functions; selector codes index into it. */
struct basis
{
  std::string name;
  std::vector<boolean_function> functions;

  uint32_t size() const { return static_cast<uint32_t>( functions.size() ); }

  uint32_t max_arity() const
  {
    uint32_t a = 0;
    for ( auto const& f : functions )
      a = std::max( a, f.num_inputs() );
    return a;
  }

  uint32_t max_out_arity() const
  {
    uint32_t a = 0;
    for ( auto const& f : functions )
      a = std::max( a, f.num_outputs() );
    return a;
  }

  /*! \brief Index of a function with the same table, or -1. */
  int find( boolean_function const& f ) const
  {
    for ( auto i = 0u; i < functions.size(); ++i )
    {
      if ( functions[i].same_table( f ) )
        return static_cast<int>( i );
    }
    return -1;
  }
};

} // namespace exsyn
