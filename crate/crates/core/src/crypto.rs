//! Hashing, keys and signatures.
//!
//! Addresses are SHA-256 digests of compressed secp256k1 public keys.
//! Signatures are deterministic ECDSA (RFC 6979) over SHA-256, so the same
//! key signing the same bytes always yields the same signature.

use std::fmt;

use k256::ecdsa::signature::{Signer, Verifier};
use k256::ecdsa::{SigningKey, VerifyingKey};
use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::elliptic_curve::PrimeField;
use k256::{NonZeroScalar, ProjectivePoint, Scalar};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

macro_rules! byte_newtype {
    ($(#[$meta:meta])* $name:ident, $len:expr) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub [u8; $len]);

        impl $name {
            pub const LEN: usize = $len;

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }

            pub fn to_hex(&self) -> String {
                hex::encode(self.0)
            }

            pub fn from_hex(s: &str) -> Option<Self> {
                let bytes = hex::decode(s).ok()?;
                Self::from_slice(&bytes)
            }

            pub fn from_slice(bytes: &[u8]) -> Option<Self> {
                <[u8; $len]>::try_from(bytes).ok().map($name)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), &self.to_hex()[..12])
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.to_hex())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                if s.is_human_readable() {
                    s.serialize_str(&self.to_hex())
                } else {
                    s.serialize_bytes(&self.0)
                }
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                use serde::de::Error;
                if d.is_human_readable() {
                    let s = String::deserialize(d)?;
                    Self::from_hex(&s).ok_or_else(|| D::Error::custom("bad hex length"))
                } else {
                    let bytes: Vec<u8> = serde::de::Deserialize::deserialize(d)?;
                    Self::from_slice(&bytes).ok_or_else(|| D::Error::custom("bad byte length"))
                }
            }
        }
    };
}

byte_newtype!(
    /// A 32-byte SHA-256 digest.
    Hash32,
    32
);
byte_newtype!(
    /// 32-byte account identifier: SHA-256 of the compressed public key.
    Address,
    32
);
byte_newtype!(
    /// Compressed SEC1 encoding of a secp256k1 public key.
    PublicKey,
    33
);
byte_newtype!(
    /// Fixed-width `r || s` ECDSA signature.
    Signature,
    64
);

impl Address {
    /// The all-zero address. No keypair hashes to it, so nothing it holds can
    /// ever be moved by a signed transaction.
    pub const BURN: Address = Address([0; 32]);

    pub fn from_public_key(pk: &PublicKey) -> Address {
        Address(sha256(&pk.0).0)
    }
}

pub fn sha256(bytes: &[u8]) -> Hash32 {
    Hash32(Sha256::digest(bytes).into())
}

/// Hashes each part with a big-endian length prefix so that part boundaries
/// cannot be shifted.
pub fn hash_parts(parts: &[&[u8]]) -> Hash32 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_be_bytes());
        h.update(p);
    }
    Hash32(h.finalize().into())
}

/// Maps arbitrary bytes onto a non-zero curve scalar by rehashing with a
/// counter until the digest lies in range.
pub(crate) fn hash_to_scalar(domain: &[u8], input: &[u8]) -> NonZeroScalar {
    let mut counter = 0u32;
    loop {
        let digest = hash_parts(&[domain, input, &counter.to_be_bytes()]);
        let repr = k256::FieldBytes::from(digest.0);
        if let Some(s) = Option::<Scalar>::from(Scalar::from_repr(repr)) {
            if let Some(nz) = Option::<NonZeroScalar>::from(NonZeroScalar::new(s)) {
                return nz;
            }
        }
        counter += 1;
    }
}

fn point_to_public(point: &ProjectivePoint) -> PublicKey {
    let encoded = point.to_affine().to_encoded_point(true);
    PublicKey::from_slice(encoded.as_bytes()).expect("compressed point is 33 bytes")
}

impl PublicKey {
    pub(crate) fn to_point(self) -> Option<ProjectivePoint> {
        let vk = VerifyingKey::from_sec1_bytes(&self.0).ok()?;
        Some(ProjectivePoint::from(*vk.as_affine()))
    }

    pub(crate) fn from_point(point: &ProjectivePoint) -> PublicKey {
        point_to_public(point)
    }

    pub fn verify(&self, msg: &[u8], sig: &Signature) -> bool {
        let Ok(vk) = VerifyingKey::from_sec1_bytes(&self.0) else {
            return false;
        };
        let Ok(sig) = k256::ecdsa::Signature::from_slice(&sig.0) else {
            return false;
        };
        vk.verify(msg, &sig).is_ok()
    }
}

/// A secp256k1 keypair together with its ledger address.
#[derive(Clone)]
pub struct KeyPair {
    secret: NonZeroScalar,
    public: PublicKey,
    address: Address,
}

impl KeyPair {
    /// Deterministic generation: the same seed always yields the same keys.
    pub fn from_seed(seed: [u8; 32]) -> Self {
        Self::from_scalar(hash_to_scalar(b"paysim/keygen", &seed))
    }

    pub(crate) fn from_scalar(secret: NonZeroScalar) -> Self {
        let point = ProjectivePoint::GENERATOR * *secret;
        let public = point_to_public(&point);
        let address = Address::from_public_key(&public);
        KeyPair { secret, public, address }
    }

    pub(crate) fn scalar(&self) -> &NonZeroScalar {
        &self.secret
    }

    pub fn public(&self) -> PublicKey {
        self.public
    }

    pub fn address(&self) -> Address {
        self.address
    }

    /// Raw 32-byte secret, big-endian.
    pub fn secret_bytes(&self) -> [u8; 32] {
        self.secret.to_repr().into()
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        let key = SigningKey::from(self.secret);
        let sig: k256::ecdsa::Signature = key.sign(msg);
        Signature::from_slice(&sig.to_bytes()).expect("ecdsa signature is 64 bytes")
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("address", &self.address).finish_non_exhaustive()
    }
}
